#include "mwe/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "mwe/csls.hpp"
#include "mwe/errors.hpp"

namespace mwe {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

void EvalDictionary::add(const std::string& src, const std::string& tgt) {
  auto it = index_.find(src);
  if (it == index_.end()) {
    index_.emplace(src, entries.size());
    entries.push_back({src, {tgt}});
    return;
  }
  auto& targets = entries[it->second].second;
  if (std::find(targets.begin(), targets.end(), tgt) == targets.end()) targets.push_back(tgt);
}

EvalDictionary load_dictionary(const std::filesystem::path& path, std::string src_lang, std::string tgt_lang) {
  std::ifstream in = open_input(path);
  const std::string name = path.string();
  EvalDictionary dict;
  dict.src_lang = std::move(src_lang);
  dict.tgt_lang = std::move(tgt_lang);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 2) {
      throw ParseError(name, line_no, "expected 'source target', found " + std::to_string(fields.size()) + " fields");
    }
    dict.add(std::string(fields[0]), std::string(fields[1]));
  }
  if (dict.entries.empty()) throw ParseError(name, 0, "dictionary has no entries");
  return dict;
}

double PrecisionResult::at(std::size_t k) const {
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] == k) return precision[i];
  }
  throw ArgumentError("precision@" + std::to_string(k) + " was not evaluated");
}

PrecisionResult word_translation_precision(const EvalDictionary& dict, const EmbeddingSpace& src,
                                           const EmbeddingSpace& tgt, const ConstMatrixRef& src_encoder,
                                           const ConstMatrixRef& tgt_encoder, const std::vector<std::size_t>& ks,
                                           std::size_t csls_n) {
  if (ks.empty()) throw ArgumentError("word_translation_precision: no k given");
  for (auto k : ks) {
    if (k == 0) throw ArgumentError("word_translation_precision: k must be positive");
  }
  if (csls_n == 0) throw ArgumentError("word_translation_precision: csls_n must be positive");
  if (src.dim() != tgt.dim() || src_encoder.rows() != src.dim() || tgt_encoder.rows() != tgt.dim()) {
    throw ShapeError("word_translation_precision: dimension mismatch");
  }

  PrecisionResult result;
  result.ks = ks;
  result.total = dict.size();
  std::vector<std::size_t> query_rows;
  std::vector<std::unordered_set<std::size_t>> gold;
  for (const auto& [word, targets] : dict.entries) {
    const auto s = src.vocab().find(word);
    if (!s) continue;
    std::unordered_set<std::size_t> ok;
    for (const auto& t : targets) {
      if (auto r = tgt.vocab().find(t)) ok.insert(*r);
    }
    if (ok.empty()) continue;
    query_rows.push_back(*s);
    gold.push_back(std::move(ok));
  }
  result.evaluated = query_rows.size();
  if (query_rows.empty()) {
    throw EvalError("no evaluable dictionary entries (" + std::to_string(dict.size()) + " entries, all out of vocabulary)");
  }

  Matrix query_src(static_cast<Eigen::Index>(query_rows.size()), src.dim());
  for (std::size_t q = 0; q < query_rows.size(); ++q) {
    query_src.row(static_cast<Eigen::Index>(q)) = src.matrix().row(static_cast<Eigen::Index>(query_rows[q]));
  }
  const Matrix queries = map_rows(query_src, src_encoder);
  const Matrix keys = map_rows(tgt.matrix(), tgt_encoder);
  const Matrix all_src = map_rows(src.matrix(), src_encoder);
  CslsPenalties pen;
  pen.queries = mean_topk_cosine(queries, keys, std::min(csls_n, tgt.size()));
  pen.keys = mean_topk_cosine(keys, all_src, std::min(csls_n, src.size()));

  const std::size_t kmax = std::min(*std::max_element(ks.begin(), ks.end()), tgt.size());
  const auto neighbors = csls_topk(queries, keys, csls_n, kmax, pen);
  result.hits.assign(ks.size(), 0);
  for (std::size_t q = 0; q < neighbors.size(); ++q) {
    // rank of the first correct candidate, or kmax when none
    std::size_t first_hit = kmax;
    for (std::size_t r = 0; r < neighbors[q].indices.size(); ++r) {
      if (gold[q].count(neighbors[q].indices[r])) {
        first_hit = r;
        break;
      }
    }
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      if (first_hit < ks[ki]) ++result.hits[ki];
    }
  }
  for (auto h : result.hits) {
    result.precision.push_back(static_cast<double>(h) / static_cast<double>(result.evaluated));
  }
  return result;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rho(const std::vector<double>& pred, const std::vector<double>& gold) {
  if (pred.size() != gold.size()) throw ArgumentError("spearman_rho: length mismatch");
  if (pred.size() < 2) throw EvalError("spearman_rho: need at least two items");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (std::isnan(pred[i]) || std::isnan(gold[i])) throw EvalError("spearman_rho: NaN input");
  }
  const auto a = average_ranks(pred);
  const auto b = average_ranks(gold);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw EvalError("spearman_rho: constant input has no rank variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

SimilarityDataset load_similarity_dataset(const std::filesystem::path& path, std::string lang1, std::string lang2) {
  std::ifstream in = open_input(path);
  const std::string name = path.string();
  SimilarityDataset data;
  data.lang1 = std::move(lang1);
  data.lang2 = std::move(lang2);
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 3) throw ParseError(name, line_no, "expected 'word1<TAB>word2<TAB>score'");
    double score = 0.0;
    try {
      std::size_t used = 0;
      score = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ParseError(name, line_no, "invalid score '" + fields[2] + "'");
    }
    if (!std::isfinite(score)) throw ParseError(name, line_no, "score must be finite");
    if (!seen.emplace(fields[0], fields[1]).second) {
      throw ParseError(name, line_no, "repeated pair '" + fields[0] + "' / '" + fields[1] + "'");
    }
    data.items.push_back({fields[0], fields[1], score});
  }
  return data;
}

ClwsResult evaluate_clws(const SimilarityDataset& dataset, const EmbeddingSpace& space1,
                         const EmbeddingSpace& space2, const ConstMatrixRef& encoder1,
                         const ConstMatrixRef& encoder2) {
  if (space1.dim() != space2.dim()) throw ShapeError("evaluate_clws: dimension mismatch");
  ClwsResult result;
  result.total = dataset.items.size();
  std::vector<double> pred;
  std::vector<double> gold;
  for (const auto& item : dataset.items) {
    const auto a = space1.vocab().find(item.w1);
    const auto b = space2.vocab().find(item.w2);
    if (!a || !b) continue;
    const Matrix ma = map_rows(space1.matrix().row(static_cast<Eigen::Index>(*a)), encoder1);
    const Matrix mb = map_rows(space2.matrix().row(static_cast<Eigen::Index>(*b)), encoder2);
    const double na = ma.norm();
    const double nb = mb.norm();
    pred.push_back(na > 0 && nb > 0 ? ma.row(0).dot(mb.row(0)) / (na * nb) : 0.0);
    gold.push_back(item.gold);
  }
  result.evaluated = pred.size();
  if (pred.size() < 2) throw EvalError("evaluate_clws: fewer than two in-vocabulary pairs");
  result.rho = spearman_rho(pred, gold);
  return result;
}

const PairPrecision* PrecisionTable::find(std::size_t src, std::size_t tgt) const {
  for (const auto& p : pairs) {
    if (p.src == src && p.tgt == tgt) return &p;
  }
  return nullptr;
}

double PrecisionTable::single_source(std::size_t lang, std::size_t k) const {
  return mean_if([lang](std::size_t s, std::size_t) { return s == lang; }, k);
}

double PrecisionTable::single_target(std::size_t lang, std::size_t k) const {
  return mean_if([lang](std::size_t, std::size_t t) { return t == lang; }, k);
}

double PrecisionTable::overall(std::size_t k) const {
  return mean_if([](std::size_t, std::size_t) { return true; }, k);
}

void PrecisionTable::print_table(std::ostream& out, std::size_t k) const {
  const int w = 8;
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "precision@" << k << " (%), rows = source, columns = target\n";
  out << std::left << std::setw(14) << "" << std::right;
  for (const auto& l : langs) out << std::setw(w) << l;
  out << std::setw(15) << "Single Source" << '\n';
  out << std::fixed << std::setprecision(1);
  for (std::size_t s = 0; s < langs.size(); ++s) {
    out << std::left << std::setw(14) << langs[s] << std::right;
    for (std::size_t t = 0; t < langs.size(); ++t) {
      const auto* p = find(s, t);
      if (p) {
        out << std::setw(w) << 100.0 * p->result.at(k);
      } else {
        out << std::setw(w) << "-";
      }
    }
    out << std::setw(15) << 100.0 * single_source(s, k) << '\n';
  }
  out << std::left << std::setw(14) << "Single Target" << std::right;
  for (std::size_t t = 0; t < langs.size(); ++t) out << std::setw(w) << 100.0 * single_target(t, k);
  out << '\n' << std::left << std::setw(14) << "Overall" << std::right << std::setw(w) << 100.0 * overall(k) << '\n';
  out.flags(flags);
  out.precision(precision);
}

void PrecisionTable::print_csv(std::ostream& out) const {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "src,tgt,k,precision,hits,evaluated,total,coverage\n";
  out << std::setprecision(10);
  std::vector<std::size_t> ks;
  for (const auto& p : pairs) {
    for (std::size_t i = 0; i < p.result.ks.size(); ++i) {
      out << langs[p.src] << ',' << langs[p.tgt] << ',' << p.result.ks[i] << ',' << p.result.precision[i] << ','
          << p.result.hits[i] << ',' << p.result.evaluated << ',' << p.result.total << ',' << p.result.coverage()
          << '\n';
      if (std::find(ks.begin(), ks.end(), p.result.ks[i]) == ks.end()) ks.push_back(p.result.ks[i]);
    }
  }
  for (auto k : ks) {
    for (std::size_t l = 0; l < langs.size(); ++l) {
      out << "Single Source," << langs[l] << ',' << k << ',' << single_source(l, k) << ",,,,\n";
    }
    for (std::size_t l = 0; l < langs.size(); ++l) {
      out << "Single Target," << langs[l] << ',' << k << ',' << single_target(l, k) << ",,,,\n";
    }
    out << "Overall,," << k << ',' << overall(k) << ",,,,\n";
  }
  out.flags(flags);
  out.precision(precision);
}

std::vector<PairMapping> pair_mappings(const MappingSet& mappings) {
  std::vector<PairMapping> out;
  for (std::size_t i = 0; i < mappings.size(); ++i) {
    for (std::size_t j = 0; j < mappings.size(); ++j) {
      if (i == j) continue;
      out.push_back({i, j, mappings.encoder(j).transpose() * mappings.encoder(i)});
    }
  }
  return out;
}

PrecisionTable evaluate_pairs(const std::vector<EmbeddingSpace>& spaces, const std::vector<PairMapping>& maps,
                              const DictionarySet& dicts, const std::vector<std::size_t>& ks, std::size_t csls_n) {
  PrecisionTable table;
  for (const auto& s : spaces) table.langs.push_back(s.lang());
  for (const auto& m : maps) {
    auto it = dicts.find({m.src, m.tgt});
    if (it == dicts.end()) continue;
    const Matrix identity = Matrix::Identity(m.map.rows(), m.map.cols());
    table.pairs.push_back({m.src, m.tgt,
                           word_translation_precision(it->second, spaces.at(m.src), spaces.at(m.tgt), m.map,
                                                      identity, ks, csls_n)});
  }
  return table;
}

void print_clws_table(std::ostream& out, const std::vector<std::string>& langs, const std::vector<ClwsRow>& rows) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::left << std::setw(24) << "dataset" << std::setw(10) << "pair" << std::right << std::setw(10) << "rho"
      << std::setw(12) << "coverage" << '\n';
  out << std::fixed << std::setprecision(3);
  double sum = 0.0;
  for (const auto& r : rows) {
    out << std::left << std::setw(24) << r.name << std::setw(10) << (langs[r.lang1] + "-" + langs[r.lang2])
        << std::right << std::setw(10) << r.result.rho << std::setw(12) << r.result.coverage() << '\n';
    sum += r.result.rho;
  }
  if (!rows.empty()) {
    out << std::left << std::setw(34) << "Average" << std::right << std::setw(10)
        << sum / static_cast<double>(rows.size()) << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

void print_clws_csv(std::ostream& out, const std::vector<std::string>& langs, const std::vector<ClwsRow>& rows) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "dataset,lang1,lang2,rho,evaluated,total,coverage\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.name << ',' << langs[r.lang1] << ',' << langs[r.lang2] << ',' << r.result.rho << ','
        << r.result.evaluated << ',' << r.result.total << ',' << r.result.coverage() << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace mwe
