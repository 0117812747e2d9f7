#pragma once

#include "poemetric/agreement.hpp"
#include "poemetric/corpus.hpp"
#include "poemetric/csv.hpp"
#include "poemetric/dimensions.hpp"
#include "poemetric/error.hpp"
#include "poemetric/form_validator.hpp"
#include "poemetric/judge_client.hpp"
#include "poemetric/lexicon.hpp"
#include "poemetric/parallel.hpp"
#include "poemetric/rhyme.hpp"
#include "poemetric/scansion.hpp"
#include "poemetric/style_metrics.hpp"
#include "poemetric/text.hpp"
#include "poemetric/version.hpp"
