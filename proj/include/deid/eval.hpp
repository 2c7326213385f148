#ifndef DEID_EVAL_HPP
#define DEID_EVAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "deid/corpus.hpp"
#include "deid/corpus_io.hpp"
#include "deid/error.hpp"
#include "deid/pipeline.hpp"
#include "deid/spans.hpp"
#include "deid/tokenizer.hpp"

// Scoring. Strict mode demands the suppressed span carry the right label;
// loose mode only asks whether the text was suppressed at all, because a
// person hidden behind [ORG] is still hidden. Kappa measures token-level
// agreement between two annotators of the same corpus.

namespace deid {

enum class EvalMode { Strict, Loose };

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

using ConfusionTable = std::array<ConfusionCounts, label_count>;

inline ConfusionTable& operator+=(ConfusionTable& sum, const ConfusionTable& part) {
  for (std::size_t i = 0; i < label_count; ++i) {
    sum[i].tp += part[i].tp;
    sum[i].fp += part[i].fp;
    sum[i].fn += part[i].fn;
  }
  return sum;
}

struct ClassReport {
  Label label = Label::Date;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t support = 0;  // tp + fn
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = false;
  bool recall_defined = false;
  bool f1_defined = false;
};

// P, R and F1 from raw counts; every 0/0 is reported as value 0 with its
// defined-flag cleared rather than as NaN.
inline ClassReport metrics(const ConfusionCounts& counts) {
  ClassReport report;
  report.tp = counts.tp;
  report.fp = counts.fp;
  report.fn = counts.fn;
  report.support = counts.tp + counts.fn;
  const double tp = static_cast<double>(counts.tp);
  if (counts.tp + counts.fp > 0) {
    report.precision = tp / static_cast<double>(counts.tp + counts.fp);
    report.precision_defined = true;
  }
  if (counts.tp + counts.fn > 0) {
    report.recall = tp / static_cast<double>(counts.tp + counts.fn);
    report.recall_defined = true;
  }
  if (report.precision_defined && report.recall_defined &&
      report.precision + report.recall > 0.0) {
    report.f1 = 2.0 * report.precision * report.recall / (report.precision + report.recall);
    report.f1_defined = true;
  }
  return report;
}

inline ClassReport metrics(Label label, const ConfusionCounts& counts) {
  ClassReport report = metrics(counts);
  report.label = label;
  return report;
}

namespace detail {

// Minimum overlap (in characters) a predicted span must share with a gold
// span of the given length to count as matching it. fraction <= 0 means
// any overlap at all.
inline std::size_t match_threshold(std::size_t gold_length, double fraction) {
  if (fraction <= 0.0) return 1;
  const double raw = std::ceil(fraction * static_cast<double>(gold_length) - 1e-9);
  const auto threshold = static_cast<std::size_t>(raw < 1.0 ? 1.0 : raw);
  return threshold;
}

template <typename Span>
void require_sorted_disjoint(std::vector<const Span*>& spans, const char* what) {
  std::sort(spans.begin(), spans.end(),
            [](const Span* a, const Span* b) { return a->start < b->start; });
  for (std::size_t i = 1; i < spans.size(); ++i)
    if (spans[i]->start < spans[i - 1]->end)
      throw Error(std::string(what) + " spans overlap (offsets " +
                  std::to_string(spans[i - 1]->start) + ".." +
                  std::to_string(spans[i - 1]->end) + " and " +
                  std::to_string(spans[i]->start) + ".." + std::to_string(spans[i]->end) + ")");
}

}  // namespace detail

// Confusion counts for one document. A gold span is matched when a
// predicted span overlaps at least the configured fraction of it. Strict:
// a same-label match is a tp, a wrong-label match is a fn for the gold
// label while the mislabeled predicted span picks up an fp; an unmatched
// predicted span is an fp. Loose: any-label matches are tps and false
// positives are not counted.
inline ConfusionTable match_spans(const std::vector<Annotation>& gold,
                                  const std::vector<SelectedSpan>& predicted, EvalMode mode,
                                  double overlap_fraction = 0.0) {
  std::vector<const Annotation*> gold_sorted;
  gold_sorted.reserve(gold.size());
  for (const Annotation& g : gold) gold_sorted.push_back(&g);
  detail::require_sorted_disjoint(gold_sorted, "gold");

  std::vector<const SelectedSpan*> pred_sorted;
  pred_sorted.reserve(predicted.size());
  for (const SelectedSpan& p : predicted) pred_sorted.push_back(&p);
  detail::require_sorted_disjoint(pred_sorted, "predicted");

  ConfusionTable table{};
  auto cell = [&table](Label label) -> ConfusionCounts& {
    return table[static_cast<std::size_t>(label)];
  };

  for (const Annotation* g : gold_sorted) {
    const std::size_t threshold = detail::match_threshold(g->end - g->start, overlap_fraction);
    bool matched_any = false;
    bool matched_same = false;
    for (const SelectedSpan* p : pred_sorted) {
      if (overlap_length(g->start, g->end, p->start, p->end) < threshold) continue;
      matched_any = true;
      if (p->label == g->label) matched_same = true;
    }
    const bool hit = mode == EvalMode::Loose ? matched_any : matched_same;
    if (hit)
      ++cell(g->label).tp;
    else
      ++cell(g->label).fn;
  }

  if (mode == EvalMode::Strict) {
    for (const SelectedSpan* p : pred_sorted) {
      bool earns_tp = false;
      for (const Annotation* g : gold_sorted) {
        if (g->label != p->label) continue;
        const std::size_t threshold =
            detail::match_threshold(g->end - g->start, overlap_fraction);
        if (overlap_length(g->start, g->end, p->start, p->end) >= threshold) {
          earns_tp = true;
          break;
        }
      }
      if (!earns_tp) ++cell(p->label).fp;
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Corpus-level evaluation

using PredictionsByDoc = std::map<std::string, std::vector<SelectedSpan>>;

// Reads predictions either from a suppression report (doc_id, start, end,
// label, source, replacement) or from a gold-style annotation file; both
// carry the span fields evaluation needs.
inline PredictionsByDoc read_predictions(std::istream& in,
                                         const std::string& file = "<predictions>") {
  PredictionsByDoc by_doc;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return by_doc;
  ++line_no;
  line = detail::chomp(std::move(line));
  std::size_t columns = 0;
  if (line == report_header)
    columns = 6;
  else if (line == annotation_header)
    columns = 5;
  else
    throw ParseError(file, 1, "unrecognized header; expected a suppression report or an annotation file");
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::chomp(std::move(line));
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string_view> fields = detail::split_tabs(line);
    if (fields.size() != columns)
      throw ParseError(file, line_no,
                       "expected " + std::to_string(columns) + " tab-separated fields, found " +
                           std::to_string(fields.size()));
    SelectedSpan span;
    span.start = detail::parse_offset(fields[1], file, line_no, "start offset");
    span.end = detail::parse_offset(fields[2], file, line_no, "end offset");
    if (span.start >= span.end)
      throw ParseError(file, line_no, "span start must be less than span end");
    const auto label = label_from_string(fields[3]);
    if (!label)
      throw ParseError(file, line_no, "unknown label '" + std::string(fields[3]) + "'");
    span.label = *label;
    span.source = columns == 6 ? std::string(fields[4]) : "gold";
    by_doc[std::string(fields[0])].push_back(std::move(span));
  }
  return by_doc;
}

inline PredictionsByDoc load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open predictions file: " + path);
  return read_predictions(in, path);
}

struct EvalResult {
  ConfusionTable counts{};  // micro-aggregated across documents

  std::vector<ClassReport> class_reports() const {
    std::vector<ClassReport> rows;
    rows.reserve(label_count);
    for (Label label : all_labels)
      rows.push_back(metrics(label, counts[static_cast<std::size_t>(label)]));
    return rows;
  }

  ConfusionCounts totals() const {
    ConfusionCounts sum;
    for (const ConfusionCounts& c : counts) {
      sum.tp += c.tp;
      sum.fp += c.fp;
      sum.fn += c.fn;
    }
    return sum;
  }
};

// Micro-aggregate per-document confusion counts over the gold corpus. The
// document universe is the gold file's: a gold document without
// predictions scores all-fn (failed documents must not inflate recall),
// and a prediction for an unknown document id is an error.
inline EvalResult evaluate_corpus(const std::vector<Annotation>& gold,
                                  const PredictionsByDoc& predictions, EvalMode mode,
                                  double overlap_fraction = 0.0) {
  std::map<std::string, std::vector<Annotation>> gold_by_doc;
  for (const Annotation& g : gold) gold_by_doc[g.doc_id].push_back(g);
  for (const auto& [doc_id, spans] : predictions)
    if (!gold_by_doc.count(doc_id))
      throw Error("prediction for unknown document id '" + doc_id + "'");

  static const std::vector<SelectedSpan> no_predictions;
  EvalResult result;
  for (const auto& [doc_id, doc_gold] : gold_by_doc) {
    const auto it = predictions.find(doc_id);
    const std::vector<SelectedSpan>& doc_pred =
        it == predictions.end() ? no_predictions : it->second;
    result.counts += match_spans(doc_gold, doc_pred, mode, overlap_fraction);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Cohen's kappa

struct KappaResult {
  double pr_a = 0.0;   // observed agreement
  double pr_e = 0.0;   // expected chance agreement
  double kappa = 0.0;
};

using TokenCategory = std::optional<Label>;  // nullopt = O (outside any PID)

inline double kappa_from_agreements(double pr_a, double pr_e) {
  if (pr_a >= 1.0) return 1.0;  // also covers the degenerate pr_e == 1 case
  return (pr_a - pr_e) / (1.0 - pr_e);
}

inline KappaResult cohen_kappa(const std::vector<TokenCategory>& labels_a,
                               const std::vector<TokenCategory>& labels_b) {
  if (labels_a.size() != labels_b.size())
    throw Error("kappa inputs differ in length: " + std::to_string(labels_a.size()) + " vs " +
                std::to_string(labels_b.size()));
  if (labels_a.empty()) throw Error("kappa requires at least one token");

  const double n = static_cast<double>(labels_a.size());
  std::size_t agree = 0;
  std::map<TokenCategory, std::size_t> marginal_a;
  std::map<TokenCategory, std::size_t> marginal_b;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    if (labels_a[i] == labels_b[i]) ++agree;
    ++marginal_a[labels_a[i]];
    ++marginal_b[labels_b[i]];
  }

  KappaResult result;
  result.pr_a = static_cast<double>(agree) / n;
  for (const auto& [category, count_a] : marginal_a) {
    const auto it = marginal_b.find(category);
    if (it == marginal_b.end()) continue;
    result.pr_e += (static_cast<double>(count_a) / n) * (static_cast<double>(it->second) / n);
  }
  result.kappa = kappa_from_agreements(result.pr_a, result.pr_e);
  return result;
}

/// Per-token categories for one annotator over one document: the label of
// the annotation owning each token, O elsewhere.
inline std::vector<TokenCategory> token_categories(const Document& doc,
                                                   const std::vector<Annotation>& annotations,
                                                   const std::vector<Token>& tokens) {
  const std::vector<TaggedToken> tagged = annotations_to_iob2(doc, annotations, tokens);
  std::vector<TokenCategory> categories;
  categories.reserve(tagged.size());
  for (const TaggedToken& t : tagged)
    categories.push_back(t.tag.kind == IOB2Tag::Kind::O ? TokenCategory{}
                                                        : TokenCategory{t.tag.label});
  return categories;
}

// Token-level agreement between two annotators over one shared corpus.
inline KappaResult kappa_over_corpus(const std::vector<Document>& corpus,
                                     const std::vector<Annotation>& annotations_a,
                                     const std::vector<Annotation>& annotations_b,
                                     const TokenizerConfig& tokenizer_config = {}) {
  std::map<std::string, std::vector<Annotation>> by_doc_a;
  for (const Annotation& a : annotations_a) by_doc_a[a.doc_id].push_back(a);
  std::map<std::string, std::vector<Annotation>> by_doc_b;
  for (const Annotation& b : annotations_b) by_doc_b[b.doc_id].push_back(b);

  std::vector<TokenCategory> sequence_a;
  std::vector<TokenCategory> sequence_b;
  for (const Document& doc : corpus) {
    const std::vector<Token> tokens = tokenize(doc.text, tokenizer_config);
    static const std::vector<Annotation> none;
    const auto it_a = by_doc_a.find(doc.id);
    const auto it_b = by_doc_b.find(doc.id);
    const std::vector<TokenCategory> cats_a =
        token_categories(doc, it_a == by_doc_a.end() ? none : it_a->second, tokens);
    const std::vector<TokenCategory> cats_b =
        token_categories(doc, it_b == by_doc_b.end() ? none : it_b->second, tokens);
    sequence_a.insert(sequence_a.end(), cats_a.begin(), cats_a.end());
    sequence_b.insert(sequence_b.end(), cats_b.begin(), cats_b.end());
  }
  return cohen_kappa(sequence_a, sequence_b);
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline std::string format_ratio(double value, bool defined) {
  if (!defined) return "-";
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << value;
  return out.str();
}

}  // namespace detail

// Machine-readable result table, one row per label in report order plus an
// ALL row with micro-aggregated counts. Undefined ratios print as "-".
inline void write_eval_tsv(std::ostream& out, const EvalResult& result, EvalMode mode) {
  const bool strict = mode == EvalMode::Strict;
  if (strict)
    out << "label\ttp\tfp\tfn\tprecision\trecall\tf1\tsupport\n";
  else
    out << "label\ttp\tfn\trecall\tsupport\n";

  auto emit = [&](const std::string& name, const ClassReport& row) {
    if (strict) {
      out << name << '\t' << row.tp << '\t' << row.fp << '\t' << row.fn << '\t'
          << detail::format_ratio(row.precision, row.precision_defined) << '\t'
          << detail::format_ratio(row.recall, row.recall_defined) << '\t'
          << detail::format_ratio(row.f1, row.f1_defined) << '\t' << row.support << '\n';
    } else {
      out << name << '\t' << row.tp << '\t' << row.fn << '\t'
          << detail::format_ratio(row.recall, row.recall_defined) << '\t' << row.support
          << '\n';
    }
  };
  for (const ClassReport& row : result.class_reports()) emit(to_string(row.label), row);
  emit("ALL", metrics(result.totals()));
}

// Human-readable aligned table for standard output.
inline std::string render_eval_table(const EvalResult& result, EvalMode mode) {
  const bool strict = mode == EvalMode::Strict;
  std::vector<std::vector<std::string>> rows;
  if (strict)
    rows.push_back({"label", "tp", "fp", "fn", "precision", "recall", "f1", "support"});
  else
    rows.push_back({"label", "tp", "fn", "recall", "support"});

  auto add = [&](const std::string& name, const ClassReport& row) {
    if (strict) {
      rows.push_back({name, std::to_string(row.tp), std::to_string(row.fp),
                      std::to_string(row.fn),
                      detail::format_ratio(row.precision, row.precision_defined),
                      detail::format_ratio(row.recall, row.recall_defined),
                      detail::format_ratio(row.f1, row.f1_defined),
                      std::to_string(row.support)});
    } else {
      rows.push_back({name, std::to_string(row.tp), std::to_string(row.fn),
                      detail::format_ratio(row.recall, row.recall_defined),
                      std::to_string(row.support)});
    }
  };
  for (const ClassReport& row : result.class_reports()) add(to_string(row.label), row);
  add("ALL", metrics(result.totals()));

  std::vector<std::size_t> widths(rows[0].size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());

  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << "  ";
      if (c == 0) {
        out << row[c] << std::string(widths[c] - row[c].size(), ' ');
      } else {
        out << std::string(widths[c] - row[c].size(), ' ') << row[c];
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace deid

#endif  // DEID_EVAL_HPP
