// Copyright 2026 The relcomp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "relcomp/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "relcomp/error.hpp"
#include "relcomp/text.hpp"

namespace relcomp {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Dataset I/O

std::string triple_to_json_line(const Triple& t) {
  json j{{"head", t.head}, {"relation", t.relation}, {"golds", t.golds}};
  if (t.count) j["count"] = *t.count;
  return j.dump();
}

std::vector<Triple> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset " + path.string());
  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    Triple t;
    try {
      const auto j = json::parse(line);
      t.head = j.at("head").get<std::string>();
      t.relation = j.at("relation").get<std::string>();
      t.golds = j.at("golds").get<std::vector<std::string>>();
      if (j.contains("count") && !j["count"].is_null()) {
        const auto c = j["count"].get<std::int64_t>();
        if (c < 0) throw FormatError(where + ": count must be >= 0");
        t.count = static_cast<std::uint64_t>(c);
      }
    } catch (const json::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (trim(t.head).empty()) throw FormatError(where + ": empty head entity");
    if (trim(t.relation).empty()) throw FormatError(where + ": empty relation");
    if (t.golds.empty()) throw FormatError(where + ": golds must be non-empty");
    triples.push_back(std::move(t));
  }
  return triples;
}

void write_dataset(std::span<const Triple> triples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write dataset " + path.string());
  for (const auto& t : triples) out << triple_to_json_line(t) << '\n';
}

// ---------------------------------------------------------------------------
// Metrics

std::vector<std::string> normalize_sequence(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isspace(c) != 0) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else if (std::ispunct(c) == 0) {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::set<std::string> normalize(std::string_view text) {
  auto seq = normalize_sequence(text);
  return {std::make_move_iterator(seq.begin()), std::make_move_iterator(seq.end())};
}

bool exact_match(std::string_view prediction, std::span<const std::string> golds,
                 MatchMode mode) {
  if (mode == MatchMode::raw) {
    return std::any_of(golds.begin(), golds.end(),
                       [&](const std::string& g) { return g == prediction; });
  }
  const auto pred = normalize_sequence(prediction);
  return std::any_of(golds.begin(), golds.end(),
                     [&](const std::string& g) { return normalize_sequence(g) == pred; });
}

double jaccard(std::string_view a, std::string_view b) {
  const auto sa = normalize(a);
  const auto sb = normalize(b);
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  const auto uni = sa.size() + sb.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

bool approx_match(std::string_view prediction, std::span<const std::string> golds,
                  double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ConfigError("approximate-match threshold must be in (0, 1]");
  }
  return std::any_of(golds.begin(), golds.end(), [&](const std::string& g) {
    return jaccard(prediction, g) >= threshold;
  });
}

// ---------------------------------------------------------------------------
// Co-occurrence

SentenceTable::SentenceTable(const Corpus& corpus) {
  for (const auto& p : corpus.passages()) {
    for (auto sentence : split_sentences(p.body)) sentences_.push_back(tokenize(sentence));
  }
}

std::uint64_t SentenceTable::count(std::string_view e1, std::string_view e2) const {
  const std::string tail(e2);
  return count_any(e1, std::span<const std::string>(&tail, 1));
}

std::uint64_t SentenceTable::count_any(std::string_view e1,
                                       std::span<const std::string> tails) const {
  const auto head = tokenize(e1);
  std::vector<Phrase> tail_phrases;
  for (const auto& t : tails) {
    if (auto phrase = tokenize(t); !phrase.empty()) tail_phrases.push_back(std::move(phrase));
  }
  if (head.empty() || tail_phrases.empty()) return 0;
  std::uint64_t n = 0;
  for (const auto& sentence : sentences_) {
    if (!contains_phrase(sentence, head)) continue;
    if (std::any_of(tail_phrases.begin(), tail_phrases.end(),
                    [&](const Phrase& t) { return contains_phrase(sentence, t); })) {
      ++n;
    }
  }
  return n;
}

std::uint64_t cooccurrence_count(const Corpus& corpus, std::string_view e1,
                                 std::string_view e2) {
  return SentenceTable(corpus).count(e1, e2);
}

std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::long_tail: return "long_tail";
    case Partition::mid_frequency: return "mid_frequency";
    case Partition::high_frequency: return "high_frequency";
  }
  return "unknown";
}

Partition partition(std::uint64_t count, std::uint64_t x) {
  if (x < 1) throw ConfigError("long-tail threshold x must be >= 1");
  if (count < x) return Partition::long_tail;
  if (count < 4 * x) return Partition::mid_frequency;
  return Partition::high_frequency;
}

// ---------------------------------------------------------------------------
// Reports

EvalReport evaluate(std::span<const Triple> dataset, std::span<const std::string> predictions,
                    const EvalOptions& options) {
  if (dataset.size() != predictions.size()) {
    throw ConfigError("evaluate: " + std::to_string(dataset.size()) + " triples but " +
                      std::to_string(predictions.size()) + " predictions");
  }
  if (options.bins && *options.bins == 0) throw ConfigError("evaluate: bins must be >= 1");

  EvalReport report;
  report.options = options;
  std::vector<std::pair<bool, bool>> hits(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& t = dataset[i];
    const bool em = exact_match(predictions[i], t.golds, options.em_mode);
    const bool am = approx_match(predictions[i], t.golds, options.am_threshold);
    hits[i] = {em, am};
    for (Cell* cell : {&report.global, &report.per_relation[t.relation]}) {
      ++cell->n;
      cell->em_hits += em;
      cell->am_hits += am;
    }
    if (t.count) {
      auto& cell = report.per_partition[partition(*t.count, options.long_tail_threshold)];
      ++cell.n;
      cell.em_hits += em;
      cell.am_hits += am;
    }
  }

  if (options.bins) {
    std::vector<std::size_t> counted;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (dataset[i].count) counted.push_back(i);
    }
    std::stable_sort(counted.begin(), counted.end(), [&](std::size_t a, std::size_t b) {
      return *dataset[a].count < *dataset[b].count;
    });
    const auto nbins = *options.bins;
    const auto base = counted.size() / nbins;
    const auto extra = counted.size() % nbins;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < nbins; ++b) {
      const auto len = base + (b < extra ? 1 : 0);
      FrequencyBin bin;
      for (std::size_t j = pos; j < pos + len; ++j) {
        const auto i = counted[j];
        if (j == pos) bin.min_count = *dataset[i].count;
        bin.max_count = *dataset[i].count;
        ++bin.cell.n;
        bin.cell.em_hits += hits[i].first;
        bin.cell.am_hits += hits[i].second;
      }
      pos += len;
      report.bins.push_back(bin);
    }
  }
  return report;
}

namespace {

json cell_json(const Cell& c) {
  return {{"n", c.n}, {"em", c.em()}, {"am", c.am()}, {"em_hits", c.em_hits},
          {"am_hits", c.am_hits}};
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

void table_row(std::ostringstream& out, const std::string& label, const Cell& c) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-28s %6zu %7s %7s\n", label.c_str(), c.n,
                fixed(c.em()).c_str(), fixed(c.am()).c_str());
  out << buf;
}

void table_header(std::ostringstream& out, const std::string& title) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-28s %6s %7s %7s\n", title.c_str(), "n", "EM", "AM");
  out << buf << std::string(51, '-') << '\n';
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  json per_relation = json::object();
  for (const auto& [rel, cell] : report.per_relation) per_relation[rel] = cell_json(cell);
  json per_partition = json::object();
  for (const auto& [p, cell] : report.per_partition) {
    per_partition[std::string(to_string(p))] = cell_json(cell);
  }
  json bins = json::array();
  for (const auto& b : report.bins) {
    auto j = cell_json(b.cell);
    j["min_count"] = b.min_count;
    j["max_count"] = b.max_count;
    bins.push_back(std::move(j));
  }
  json config{{"am_threshold", report.options.am_threshold},
              {"em_mode", report.options.em_mode == MatchMode::raw ? "raw" : "normalized"},
              {"long_tail_threshold", report.options.long_tail_threshold}};
  if (report.options.bins) config["bins"] = *report.options.bins;
  json doc{{"global", cell_json(report.global)},
           {"per_relation", std::move(per_relation)},
           {"per_partition", std::move(per_partition)},
           {"bins", std::move(bins)},
           {"config", std::move(config)}};
  return doc.dump(2);
}

std::string report_to_table(const EvalReport& report) {
  std::ostringstream out;
  table_header(out, "Overall");
  table_row(out, "all", report.global);
  out << '\n';
  table_header(out, "Relation");
  for (const auto& [rel, cell] : report.per_relation) table_row(out, rel, cell);
  if (!report.per_partition.empty()) {
    out << '\n';
    table_header(out, "Frequency partition");
    for (const auto& [p, cell] : report.per_partition) {
      table_row(out, std::string(to_string(p)), cell);
    }
  }
  if (!report.bins.empty()) {
    out << '\n';
    table_header(out, "Frequency bin");
    for (std::size_t i = 0; i < report.bins.size(); ++i) {
      const auto& b = report.bins[i];
      table_row(out,
                "bin " + std::to_string(i + 1) + " [" + std::to_string(b.min_count) + "-" +
                    std::to_string(b.max_count) + "]",
                b.cell);
    }
  }
  return out.str();
}

std::string frequency_histogram_csv(std::span<const Triple> dataset) {
  std::map<std::uint64_t, std::size_t> hist;
  for (const auto& t : dataset) {
    if (t.count) ++hist[*t.count];
  }
  std::ostringstream out;
  out << "count,pairs\n";
  for (const auto& [count, pairs] : hist) out << count << ',' << pairs << '\n';
  return out.str();
}

}  // namespace relcomp
