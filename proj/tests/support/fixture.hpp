#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "poemetric/lexicon.hpp"

namespace poemetric::testing {

inline std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(POEMETRIC_DATA_DIR) / rel;
}

inline std::filesystem::path test_data_path(const std::string& rel) {
  return std::filesystem::path(POEMETRIC_TEST_DATA_DIR) / rel;
}

inline const std::filesystem::path& fixture_dict_path() {
  static const auto p = data_path("lexicon/sample.dict");
  return p;
}

// The bundled fixture dictionary, loaded once per test binary.
inline const PronouncingLexicon& fixture_lexicon() {
  static const PronouncingLexicon lex = load_dictionary_file(fixture_dict_path());
  return lex;
}

inline PronouncingLexicon lexicon_from(const std::string& text) {
  std::istringstream in(text);
  return load_dictionary(in);
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace poemetric::testing
