#pragma once

// The 28-case golden suite: for each form one conforming poem and three
// single-mutation variants, each with the exact set of failure names it must
// produce (structural failures plus gate failures).

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "poemetric/form_validator.hpp"
#include "support/poems.hpp"

namespace poemetric::testing {

struct GoldenCase {
  std::string name;
  FormName form;
  std::optional<std::string> meter;
  std::optional<std::string> rhyme;
  std::string poem;
  std::set<std::string> expected_failures;  // empty = must pass

  FormSpec spec() const {
    FormSpec s;
    s.form = form;
    if (meter) s.meter = expected_pattern(*meter);
    s.rhyme = rhyme;
    return s;
  }
};

// Common-meter quatrains written as pentameter lines.
inline std::string pentameter_ballad() {
  static const std::vector<std::string> ends = {"light", "day", "night", "way", "stone", "sea",
                                                "bone",  "free", "song", "heart", "long", "part"};
  std::vector<std::vector<std::string>> st(3);
  for (std::size_t i = 0; i < ends.size(); ++i) st[i / 4].push_back(iambic(i, ends[i]));
  return join_stanzas(st);
}

inline std::vector<GoldenCase> golden_cases() {
  const std::string pent = "iambic pentameter";
  const std::string sonnet_rhyme = "ABAB CDCD EFEF GG";
  using F = FormName;
  using L = LimerickVariant;
  using V = VillanelleVariant;
  using S = SestinaVariant;
  using P = PantoumVariant;
  using G = GhazalVariant;
  return {
      {"sonnet/conforming", F::sonnet, pent, sonnet_rhyme, sonnet(), {}},
      {"sonnet/nine-iambic-lines", F::sonnet, pent, sonnet_rhyme, sonnet(9), {"meter"}},
      {"sonnet/all-trochaic", F::sonnet, pent, sonnet_rhyme, sonnet(0), {"meter"}},
      {"sonnet/monorhyme", F::sonnet, pent, sonnet_rhyme, sonnet(14, true), {"rhyme"}},

      {"ballad/conforming", F::ballad, "common meter", "ABAB", ballad(), {}},
      {"ballad/trochaic", F::ballad, "common meter", "ABAB", ballad(false), {"meter"}},
      {"ballad/pentameter-lines", F::ballad, "common meter", "ABAB", pentameter_ballad(), {"meter"}},
      {"ballad/monorhyme", F::ballad, "common meter", "ABAB", ballad(true, true), {"rhyme"}},

      {"limerick/conforming", F::limerick, kLimerickMeter, "AABBA", limerick(), {}},
      {"limerick/unmetrical", F::limerick, kLimerickMeter, "AABBA", limerick(L::unmetrical), {"meter"}},
      {"limerick/unrhymed", F::limerick, kLimerickMeter, "AABBA", limerick(L::unrhymed), {"pattern"}},
      {"limerick/two-stanzas", F::limerick, kLimerickMeter, "AABBA", limerick(L::two_stanzas), {"pattern"}},

      {"villanelle/conforming", F::villanelle, pent, std::nullopt, villanelle(), {}},
      {"villanelle/broken-refrain", F::villanelle, pent, std::nullopt, villanelle(V::broken_refrain), {"refrain"}},
      {"villanelle/monorhyme", F::villanelle, pent, std::nullopt, villanelle(V::monorhyme), {"rhyme"}},
      {"villanelle/short-last-stanza", F::villanelle, pent, std::nullopt, villanelle(V::short_last_stanza), {"shape"}},

      {"sestina/conforming", F::sestina, pent, std::nullopt, sestina(), {}},
      {"sestina/broken-permutation", F::sestina, pent, std::nullopt, sestina(S::broken_permutation), {"permutation"}},
      {"sestina/broken-envoi", F::sestina, pent, std::nullopt, sestina(S::broken_envoi), {"envoi"}},
      {"sestina/no-envoi", F::sestina, pent, std::nullopt, sestina(S::no_envoi), {"shape"}},

      {"pantoum/conforming", F::pantoum, pent, std::nullopt, pantoum(), {}},
      {"pantoum/broken-repetition", F::pantoum, pent, std::nullopt, pantoum(P::broken_repetition), {"repetition"}},
      {"pantoum/tercet", F::pantoum, pent, std::nullopt, pantoum(P::tercet), {"quatrains"}},
      {"pantoum/unmetrical", F::pantoum, pent, std::nullopt, pantoum(P::unmetrical), {"meter"}},

      {"ghazal/conforming", F::ghazal, std::nullopt, std::nullopt, ghazal(), {}},
      {"ghazal/broken-radif", F::ghazal, std::nullopt, std::nullopt, ghazal(G::broken_radif), {"radif"}},
      {"ghazal/broken-qafia", F::ghazal, std::nullopt, std::nullopt, ghazal(G::broken_qafia), {"qafia"}},
      {"ghazal/tercet", F::ghazal, std::nullopt, std::nullopt, ghazal(G::tercet), {"couplets"}},
  };
}

inline std::set<std::string> failure_names(const FormReport& r) {
  std::set<std::string> out(r.structural_failures.begin(), r.structural_failures.end());
  out.insert(r.gate_failures.begin(), r.gate_failures.end());
  return out;
}

}  // namespace poemetric::testing
