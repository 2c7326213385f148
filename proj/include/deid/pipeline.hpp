#ifndef DEID_PIPELINE_HPP
#define DEID_PIPELINE_HPP

#include <array>
#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "deid/corpus.hpp"
#include "deid/error.hpp"
#include "deid/lexicon.hpp"
#include "deid/ner.hpp"
#include "deid/recognizers.hpp"
#include "deid/spans.hpp"
#include "deid/tokenizer.hpp"
#include "deid/unicode.hpp"

// End-to-end pipeline: tokenize, run every enabled candidate source, merge,
// suppress. Documents are independent work units; --workers N fans them out
// over N threads (one backend connection each) and reassembles results in
// input order, so worker count never changes the bytes produced.

namespace deid {

enum class SuppressionStrategy { LabelPlaceholder, NumberedPseudonym };

struct ReportEntry {
  SelectedSpan span;
  std::string replacement;
};

// Everything suppressed in one document, for audit and for evaluation.
struct DeidReport {
  std::string doc_id;
  std::vector<ReportEntry> entries;
  std::array<std::size_t, label_count> counts{};  // per Label; sums to entries.size()
};

struct RecognizerToggles {
  bool numbers = true;
  bool dates = true;
  bool emails = true;
  bool websites = true;
  bool codes = true;
  bool prefixed_person = true;
  bool gender = true;
};

struct PipelineConfig {
  TokenizerConfig tokenizer;
  RecognizerToggles recognizers;
  std::vector<Lexicon> lexicons;  // direct gazetteer classes
  Lexicon title_lexicon = default_title_lexicon();
  Lexicon gender_lexicon = default_gender_lexicon();
  std::vector<CodePattern> code_patterns;
  std::optional<BackendConfig> backend;
  int backend_bias = 0;  // added to NER span priorities; negative favours the backend
  SuppressionStrategy suppression = SuppressionStrategy::LabelPlaceholder;
  double overlap_fraction = 0.0;  // evaluation default; 0 = any overlap
  std::size_t workers = 1;
};

namespace detail {

inline std::string placeholder(Label label) { return "[" + to_string(label) + "]"; }

inline std::string pseudonym(Label label, std::size_t index) {
  return "[" + to_string(label) + "-" + std::to_string(index) + "]";
}

}  // namespace detail

// Replace every selected span, left to right, leaving all other characters
// untouched. NumberedPseudonym numbers distinct case-folded surfaces per
// label within the document, in order of first appearance, starting at 1.
inline std::pair<std::string, DeidReport> suppress(const std::string& text,
                                                   const std::vector<SelectedSpan>& spans,
                                                   SuppressionStrategy strategy) {
  const std::u32string cps = unicode::decode_utf8(text);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (spans[i].start >= spans[i].end || spans[i].end > cps.size())
      throw Error("suppression span out of range for document text");
    if (i > 0 && spans[i].start < spans[i - 1].end)
      throw Error("suppression spans overlap or are unsorted");
  }

  DeidReport report;
  std::map<std::pair<std::size_t, std::u32string>, std::size_t> pseudonym_index;
  std::array<std::size_t, label_count> next_index{};
  next_index.fill(1);

  std::string redacted;
  std::size_t cursor = 0;
  for (const SelectedSpan& span : spans) {
    redacted += unicode::encode_utf8(
        std::u32string_view(cps).substr(cursor, span.start - cursor));
    std::string replacement;
    if (strategy == SuppressionStrategy::LabelPlaceholder) {
      replacement = detail::placeholder(span.label);
    } else {
      const std::size_t label_index = static_cast<std::size_t>(span.label);
      std::u32string folded = unicode::fold(
          std::u32string_view(cps).substr(span.start, span.end - span.start));
      auto [it, inserted] =
          pseudonym_index.try_emplace({label_index, std::move(folded)}, next_index[label_index]);
      if (inserted) ++next_index[label_index];
      replacement = detail::pseudonym(span.label, it->second);
    }
    redacted += replacement;
    report.entries.push_back({span, std::move(replacement)});
    ++report.counts[static_cast<std::size_t>(span.label)];
    cursor = span.end;
  }
  redacted += unicode::encode_utf8(std::u32string_view(cps).substr(cursor));
  return {std::move(redacted), std::move(report)};
}

// Convert a mapped tag sequence into candidate spans (one per B..I run).
inline std::vector<CandidateSpan> tags_to_candidates(const std::vector<Token>& tokens,
                                                     const std::vector<IOB2Tag>& tags,
                                                     const std::string& source,
                                                     int priority_bias = 0) {
  std::vector<CandidateSpan> out;
  std::size_t i = 0;
  while (i < tags.size()) {
    if (tags[i].kind == IOB2Tag::Kind::O) {
      ++i;
      continue;
    }
    const Label label = tags[i].label;
    std::size_t last = i;
    while (last + 1 < tags.size() && tags[last + 1].kind == IOB2Tag::Kind::I &&
           tags[last + 1].label == label)
      ++last;
    CandidateSpan span = make_candidate(tokens[i].start, tokens[last].end, label, source);
    span.priority += priority_bias;
    out.push_back(std::move(span));
    i = last + 1;
  }
  return out;
}

inline std::string lexicon_source_name(Label label) {
  std::string name = to_string(label);
  for (char& c : name) c = (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  return "lexicon-" + name;
}

// All candidate spans for one token list: enabled rule recognizers, direct
// gazetteers, and the NER backend (tagger may be null when no backend is
// configured).
inline std::vector<CandidateSpan> collect_candidates(const std::vector<Token>& tokens,
                                                     const PipelineConfig& config,
                                                     TaggerConnection* tagger) {
  std::vector<CandidateSpan> candidates;
  auto absorb = [&candidates](std::vector<CandidateSpan> found) {
    candidates.insert(candidates.end(), std::make_move_iterator(found.begin()),
                      std::make_move_iterator(found.end()));
  };

  const RecognizerToggles& on = config.recognizers;
  if (on.numbers) absorb(recognize_numbers(tokens));
  if (on.dates) absorb(recognize_dates(tokens));
  if (on.emails) absorb(recognize_emails(tokens));
  if (on.websites) absorb(recognize_websites(tokens));
  if (on.codes) absorb(recognize_codes(tokens, config.code_patterns));
  if (on.prefixed_person) absorb(recognize_prefixed_person(tokens, config.title_lexicon));
  if (on.gender) absorb(recognize_gender(tokens, config.gender_lexicon));
  for (const Lexicon& lexicon : config.lexicons)
    absorb(lexicon_match(tokens, lexicon, lexicon_source_name(lexicon.label())));

  if (tagger && !tokens.empty()) {
    const std::vector<RawTag> raw = tagger->tag(tokens);
    const LabelMap& map = config.backend ? config.backend->label_map : identity_label_map();
    absorb(tags_to_candidates(tokens, map_labels(raw, map), "ner", config.backend_bias));
  }
  return candidates;
}

inline std::pair<Document, DeidReport> deidentify_document(const Document& doc,
                                                           const PipelineConfig& config,
                                                           TaggerConnection* tagger) {
  const std::vector<Token> tokens = tokenize(doc.text, config.tokenizer);
  const std::vector<SelectedSpan> selected =
      merge_spans(collect_candidates(tokens, config, tagger));
  auto [redacted, report] = suppress(doc.text, selected, config.suppression);
  report.doc_id = doc.id;
  return {Document{doc.id, std::move(redacted)}, std::move(report)};
}

// Convenience form that builds (and tears down) its own backend connection.
inline std::pair<Document, DeidReport> deidentify_document(const Document& doc,
                                                           const PipelineConfig& config) {
  std::unique_ptr<TaggerConnection> tagger;
  if (config.backend) tagger = make_tagger(*config.backend);
  return deidentify_document(doc, config, tagger.get());
}

struct DocumentFailure {
  std::string doc_id;
  std::string message;
};

struct PipelineResult {
  std::vector<Document> documents;     // redacted, input order, failures omitted
  std::vector<DeidReport> reports;     // aligned with documents
  std::vector<DocumentFailure> failures;
};

// Process a whole corpus. A backend failure (timeout, crash, protocol
// violation) fails that document only; the run continues and the failure
// is reported to the caller.
inline PipelineResult run_pipeline(const std::vector<Document>& corpus,
                                   const PipelineConfig& config) {
  const std::size_t n = corpus.size();
  std::vector<std::optional<std::pair<Document, DeidReport>>> slots(n);
  std::vector<std::optional<std::string>> errors(n);

  std::atomic<std::size_t> next{0};
  std::mutex fatal_mutex;
  std::exception_ptr fatal;

  auto worker = [&]() {
    // One backend connection per worker, created lazily so spawn failures
    // surface against the documents they affect rather than killing
    // sibling workers mid-flight.
    std::unique_ptr<TaggerConnection> tagger;
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        if (config.backend && !tagger) tagger = make_tagger(*config.backend);
        slots[i] = deidentify_document(corpus[i], config, tagger.get());
      } catch (const BackendError& e) {
        errors[i] = e.what();
      } catch (...) {
        std::lock_guard<std::mutex> lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        next.store(n);
        break;
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  PipelineResult result;
  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i]) {
      result.documents.push_back(std::move(slots[i]->first));
      result.reports.push_back(std::move(slots[i]->second));
    } else {
      result.failures.push_back(
          {corpus[i].id, errors[i] ? *errors[i] : "backend unavailable"});
    }
  }
  return result;
}

inline constexpr std::string_view report_header = "doc_id\tstart\tend\tlabel\tsource\treplacement";

inline void write_report(std::ostream& out, const std::vector<DeidReport>& reports) {
  out << report_header << '\n';
  for (const DeidReport& report : reports)
    for (const ReportEntry& entry : report.entries)
      out << report.doc_id << '\t' << entry.span.start << '\t' << entry.span.end << '\t'
          << to_string(entry.span.label) << '\t' << entry.span.source << '\t'
          << entry.replacement << '\n';
}

inline std::array<std::size_t, label_count> aggregate_counts(
    const std::vector<DeidReport>& reports) {
  std::array<std::size_t, label_count> totals{};
  for (const DeidReport& report : reports)
    for (std::size_t i = 0; i < label_count; ++i) totals[i] += report.counts[i];
  return totals;
}

}  // namespace deid

#endif  // DEID_PIPELINE_HPP
