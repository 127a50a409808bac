#include "mwe/validator.hpp"

#include <cmath>
#include <iomanip>

#include "mwe/csls.hpp"
#include "mwe/errors.hpp"

namespace mwe {

double mean_csls(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const ConstMatrixRef& src_encoder,
                 const ConstMatrixRef& tgt_encoder, std::size_t top_k, std::size_t csls_n) {
  if (src.empty() || tgt.empty() || top_k == 0) throw ArgumentError("mean_csls: empty candidate pool");
  const Matrix composed = tgt_encoder.transpose() * src_encoder;
  const Matrix queries = map_rows(frequent_slice(src, top_k), composed);
  const ConstMatrixRef pool = frequent_slice(tgt, top_k);
  const std::size_t n = std::min<std::size_t>(csls_n, static_cast<std::size_t>(std::min(queries.rows(), pool.rows())));
  const auto best = csls_topk(queries, pool, n, 1);
  double sum = 0.0;
  for (const auto& r : best) sum += r.scores.front();
  return sum / static_cast<double>(best.size());
}

ValidationReport multilingual_validation(const std::vector<EmbeddingSpace>& spaces,
                                         const std::vector<Matrix>& encoders,
                                         const ValidationOptions& options) {
  const std::size_t n = spaces.size();
  if (n < 2) throw ArgumentError("validation needs at least two languages");
  if (encoders.size() != n) throw ArgumentError("validation: one encoder per language required");
  const std::size_t pairs = n * (n - 1);
  std::vector<double> weights = options.weights;
  if (weights.empty()) {
    weights.assign(pairs, 1.0 / static_cast<double>(pairs));
  } else {
    if (weights.size() != pairs) {
      throw ArgumentError("validation: expected " + std::to_string(pairs) + " pair weights, got " +
                          std::to_string(weights.size()));
    }
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0)) throw ArgumentError("validation: weights must be non-negative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("validation: weights must sum to 1");
  }

  ValidationReport report;
  for (const auto& s : spaces) report.langs.push_back(s.lang());
  std::size_t w = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      PairValidation pv;
      pv.src = i;
      pv.tgt = j;
      pv.weight = weights[w++];
      pv.mean_csls = mean_csls(spaces[i], spaces[j], encoders[i], encoders[j], options.top_k, options.csls_n);
      report.overall += pv.weight * pv.mean_csls;
      report.pairs.push_back(pv);
    }
  }
  return report;
}

ValidationReport multilingual_validation(const std::vector<EmbeddingSpace>& spaces,
                                         const MappingSet& mappings, const ValidationOptions& options) {
  std::vector<Matrix> encoders;
  for (std::size_t l = 0; l < mappings.size(); ++l) encoders.push_back(mappings.encoder(l));
  return multilingual_validation(spaces, encoders, options);
}

void ValidationReport::print_table(std::ostream& out) const {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::left << std::setw(12) << "pair" << std::right << std::setw(12) << "mean_csls"
      << std::setw(10) << "weight" << '\n';
  for (const auto& p : pairs) {
    out << std::left << std::setw(12) << (langs[p.src] + "-" + langs[p.tgt]) << std::right << std::fixed
        << std::setprecision(4) << std::setw(12) << p.mean_csls << std::setw(10) << p.weight << '\n';
  }
  out << std::left << std::setw(12) << "V(M,E)" << std::right << std::setw(12) << overall << '\n';
  out.flags(flags);
  out.precision(precision);
}

void ValidationReport::print_csv(std::ostream& out) const {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "src,tgt,mean_csls,weight\n";
  out << std::setprecision(10);
  for (const auto& p : pairs) {
    out << langs[p.src] << ',' << langs[p.tgt] << ',' << p.mean_csls << ',' << p.weight << '\n';
  }
  out << "overall,," << overall << ",1\n";
  out.flags(flags);
  out.precision(precision);
}

}  // namespace mwe
