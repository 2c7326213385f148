#ifndef DEID_SPANS_HPP
#define DEID_SPANS_HPP

#include <algorithm>
#include <string>
#include <vector>

#include "deid/corpus.hpp"

namespace deid {

// Recognizer output. Lower priority numbers win ties during merging;
// the defaults order the classes by how directly they identify a person.
struct CandidateSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  Label label = Label::Per;
  std::string source;
  int priority = 0;

  std::size_t length() const { return end - start; }

  friend bool operator==(const CandidateSpan&, const CandidateSpan&) = default;
};

struct SelectedSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  Label label = Label::Per;
  std::string source;

  std::size_t length() const { return end - start; }

  friend bool operator==(const SelectedSpan&, const SelectedSpan&) = default;
};

inline int default_priority(Label label) {
  switch (label) {
    case Label::Per:      return 0;
    case Label::Mail:     return 1;
    case Label::Code:     return 2;
    case Label::Loc:      return 3;
    case Label::Org:      return 4;
    case Label::Date:     return 5;
    case Label::JobTitle: return 6;
    case Label::Title:    return 7;
    case Label::Gender:   return 8;
    case Label::Website:  return 9;
    case Label::Num:      return 10;
  }
  return 99;
}

inline CandidateSpan make_candidate(std::size_t start, std::size_t end, Label label,
                                    std::string source) {
  return CandidateSpan{start, end, label, std::move(source), default_priority(label)};
}

namespace detail {

// Selection order: longest first, then priority, then start, then source.
inline bool candidate_wins(const CandidateSpan& a, const CandidateSpan& b) {
  if (a.length() != b.length()) return a.length() > b.length();
  if (a.priority != b.priority) return a.priority < b.priority;
  if (a.start != b.start) return a.start < b.start;
  return a.source < b.source;
}

}  // namespace detail

// Deterministic conflict resolution across recognizers and the NER
// backend: repeatedly select the best remaining candidate and discard
// everything overlapping it. Equivalent to a single sweep over the
// candidates sorted by the selection order.
inline std::vector<SelectedSpan> merge_spans(std::vector<CandidateSpan> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(), detail::candidate_wins);
  std::vector<SelectedSpan> selected;
  for (const CandidateSpan& c : candidates) {
    const bool clashes = std::any_of(selected.begin(), selected.end(), [&](const SelectedSpan& s) {
      return ranges_intersect(c.start, c.end, s.start, s.end);
    });
    if (!clashes) selected.push_back({c.start, c.end, c.label, c.source});
  }
  std::sort(selected.begin(), selected.end(),
            [](const SelectedSpan& a, const SelectedSpan& b) { return a.start < b.start; });
  return selected;
}

}  // namespace deid

#endif  // DEID_SPANS_HPP
