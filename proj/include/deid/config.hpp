#ifndef DEID_CONFIG_HPP
#define DEID_CONFIG_HPP

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "deid/error.hpp"
#include "deid/lexicon.hpp"
#include "deid/ner.hpp"
#include "deid/pipeline.hpp"
#include "deid/recognizers.hpp"

// INI-style pipeline configuration: [recognizers], [lexicons], [backend],
// [code_patterns], [suppression], [tokenizer], [pipeline]. Unknown sections
// and keys are hard errors so typos cannot silently disable suppression.
// Relative paths inside the file resolve against the file's directory.

namespace deid {

struct IniEntry {
  std::string section;
  std::string key;
  std::string value;
  std::size_t line = 0;
};

namespace detail {

inline std::string trim_view(std::string_view s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && (s[begin] == ' ' || s[begin] == '\t')) ++begin;
  while (end > begin && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r')) --end;
  return std::string(s.substr(begin, end - begin));
}

}  // namespace detail

// `key = value` lines under `[section]` headers; a line whose first
// non-blank character is '#' is a comment. Values may contain '#' (code
// patterns need it), so there are no trailing comments.
inline std::vector<IniEntry> parse_ini(std::istream& in, const std::string& file) {
  std::vector<IniEntry> entries;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = detail::trim_view(line);
    if (text.empty() || text[0] == '#') continue;
    if (text.front() == '[') {
      if (text.back() != ']' || text.size() < 3)
        throw ParseError(file, line_no, "malformed section header: " + text);
      section = detail::trim_view(std::string_view(text).substr(1, text.size() - 2));
      if (section.empty()) throw ParseError(file, line_no, "empty section name");
      continue;
    }
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw ParseError(file, line_no, "expected key = value, got: " + text);
    IniEntry entry;
    entry.section = section;
    entry.key = detail::trim_view(std::string_view(text).substr(0, eq));
    entry.value = detail::trim_view(std::string_view(text).substr(eq + 1));
    entry.line = line_no;
    if (entry.section.empty())
      throw ParseError(file, line_no, "key outside any [section]: " + entry.key);
    if (entry.key.empty()) throw ParseError(file, line_no, "empty key");
    entries.push_back(std::move(entry));
  }
  return entries;
}

namespace detail {

inline bool parse_bool(const IniEntry& entry, const std::string& file) {
  std::string v = entry.value;
  for (char& c : v) c = (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ParseError(file, entry.line,
                   "expected a boolean for " + entry.key + ", got '" + entry.value + "'");
}

inline long parse_int(const IniEntry& entry, const std::string& file) {
  try {
    std::size_t used = 0;
    const long value = std::stol(entry.value, &used);
    if (used != entry.value.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ParseError(file, entry.line,
                     "expected an integer for " + entry.key + ", got '" + entry.value + "'");
  }
}

inline double parse_double(const IniEntry& entry, const std::string& file) {
  try {
    std::size_t used = 0;
    const double value = std::stod(entry.value, &used);
    if (used != entry.value.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ParseError(file, entry.line,
                     "expected a number for " + entry.key + ", got '" + entry.value + "'");
  }
}

inline std::string resolve_path(const std::string& value, const std::string& config_path) {
  const std::filesystem::path p(value);
  if (p.is_absolute()) return value;
  return (std::filesystem::path(config_path).parent_path() / p).string();
}

}  // namespace detail

inline CodePattern compile_code_pattern(const std::string& text) {
  try {
    return CodePattern{text, std::regex(text, std::regex::ECMAScript)};
  } catch (const std::regex_error& e) {
    throw ConfigError("invalid code pattern '" + text + "': " + e.what());
  }
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  const std::vector<IniEntry> entries = parse_ini(in, path);

  PipelineConfig config;
  std::string backend_kind = "builtin";
  std::string backend_command;
  std::string backend_label_map;
  long backend_timeout_s = 60;
  std::vector<std::pair<Label, std::string>> lexicon_paths;  // resolved later
  std::optional<std::string> title_path;
  std::optional<std::string> gender_path;

  for (const IniEntry& entry : entries) {
    auto unknown_key = [&]() -> ParseError {
      return ParseError(path, entry.line,
                        "unknown key '" + entry.key + "' in section [" + entry.section + "]");
    };
    if (entry.section == "recognizers") {
      RecognizerToggles& on = config.recognizers;
      if (entry.key == "numbers") on.numbers = detail::parse_bool(entry, path);
      else if (entry.key == "dates") on.dates = detail::parse_bool(entry, path);
      else if (entry.key == "emails") on.emails = detail::parse_bool(entry, path);
      else if (entry.key == "websites") on.websites = detail::parse_bool(entry, path);
      else if (entry.key == "codes") on.codes = detail::parse_bool(entry, path);
      else if (entry.key == "prefixed_person") on.prefixed_person = detail::parse_bool(entry, path);
      else if (entry.key == "gender") on.gender = detail::parse_bool(entry, path);
      else throw unknown_key();
    } else if (entry.section == "lexicons") {
      std::string upper = entry.key;
      for (char& c : upper) c = (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
      const auto label = label_from_string(upper);
      if (!label) throw unknown_key();
      const std::string resolved = detail::resolve_path(entry.value, path);
      if (*label == Label::Title) title_path = resolved;
      else if (*label == Label::Gender) gender_path = resolved;
      else lexicon_paths.emplace_back(*label, resolved);
    } else if (entry.section == "backend") {
      if (entry.key == "kind") backend_kind = entry.value;
      else if (entry.key == "command") backend_command = entry.value;
      else if (entry.key == "label_map") backend_label_map = detail::resolve_path(entry.value, path);
      else if (entry.key == "timeout_s") backend_timeout_s = detail::parse_int(entry, path);
      else if (entry.key == "bias") config.backend_bias = static_cast<int>(detail::parse_int(entry, path));
      else throw unknown_key();
    } else if (entry.section == "code_patterns") {
      if (entry.key == "pattern") config.code_patterns.push_back(compile_code_pattern(entry.value));
      else throw unknown_key();
    } else if (entry.section == "suppression") {
      if (entry.key == "strategy") {
        if (entry.value == "placeholder") config.suppression = SuppressionStrategy::LabelPlaceholder;
        else if (entry.value == "pseudonym") config.suppression = SuppressionStrategy::NumberedPseudonym;
        else throw ParseError(path, entry.line,
                              "strategy must be 'placeholder' or 'pseudonym', got '" +
                                  entry.value + "'");
      } else {
        throw unknown_key();
      }
    } else if (entry.section == "tokenizer") {
      if (entry.key == "email_aware") config.tokenizer.email_aware = detail::parse_bool(entry, path);
      else if (entry.key == "url_aware") config.tokenizer.url_aware = detail::parse_bool(entry, path);
      else throw unknown_key();
    } else if (entry.section == "pipeline") {
      if (entry.key == "workers") {
        const long workers = detail::parse_int(entry, path);
        if (workers < 1) throw ParseError(path, entry.line, "workers must be at least 1");
        config.workers = static_cast<std::size_t>(workers);
      } else if (entry.key == "overlap_fraction") {
        const double f = detail::parse_double(entry, path);
        if (f < 0.0 || f > 1.0)
          throw ParseError(path, entry.line, "overlap_fraction must lie in [0, 1]");
        config.overlap_fraction = f;
      } else {
        throw unknown_key();
      }
    } else {
      throw ParseError(path, entry.line, "unknown section [" + entry.section + "]");
    }
  }

  // A lexicon file the config points at but we cannot read is a problem
  // with the config, so the lower-level error is rewrapped.
  auto load_listed_lexicon = [](const std::string& lexicon_path, Label label) {
    try {
      return load_lexicon(lexicon_path, label);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  };

  // Gazetteer wiring: Per/Org/Loc lists feed the builtin backend when it
  // is selected (they are its model); with an external or absent backend
  // they match directly. Everything else always matches directly.
  std::vector<Lexicon> backend_gazetteers;
  const bool builtin = backend_kind == "builtin";
  for (const auto& [label, lexicon_path] : lexicon_paths) {
    Lexicon lexicon = load_listed_lexicon(lexicon_path, label);
    const bool ner_class = label == Label::Per || label == Label::Org || label == Label::Loc;
    if (builtin && ner_class)
      backend_gazetteers.push_back(std::move(lexicon));
    else
      config.lexicons.push_back(std::move(lexicon));
  }
  if (title_path) config.title_lexicon = load_listed_lexicon(*title_path, Label::Title);
  if (gender_path) config.gender_lexicon = load_listed_lexicon(*gender_path, Label::Gender);

  if (backend_kind == "none") {
    config.backend.reset();
  } else if (backend_kind == "builtin") {
    BackendConfig backend;
    backend.kind = BackendKind::Builtin;
    backend.gazetteers = std::move(backend_gazetteers);
    backend.timeout = std::chrono::seconds(backend_timeout_s);
    config.backend = std::move(backend);
  } else if (backend_kind == "external") {
    BackendConfig backend;
    backend.kind = BackendKind::External;
    backend.command = split_command_line(backend_command);
    if (backend.command.empty())
      throw ConfigError(path + ": backend kind 'external' requires a command");
    if (!backend_label_map.empty()) backend.label_map = load_label_map(backend_label_map);
    backend.timeout = std::chrono::seconds(backend_timeout_s);
    config.backend = std::move(backend);
  } else {
    throw ConfigError(path + ": backend kind must be 'builtin', 'external' or 'none', got '" +
                      backend_kind + "'");
  }
  if (backend_timeout_s < 1) throw ConfigError(path + ": timeout_s must be at least 1");

  return config;
}

}  // namespace deid

#endif  // DEID_CONFIG_HPP
