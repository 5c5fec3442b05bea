// Copyright 2026 the readapt authors
// SPDX-License-Identifier: Apache-2.0
#include "readapt/spectra.hpp"

#include <algorithm>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "readapt/parallel.hpp"
#include "readapt/svd.hpp"
#include "readapt/version.hpp"

namespace readapt {
namespace {

constexpr std::string_view kFactorASuffix = ".lore_a";
constexpr std::string_view kFactorBSuffix = ".lore_b";

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Truncated SVD of one tensor at the requested threshold, or nullopt when
// the tensor should stay dense (not 2-D, too small, all-zero, or factoring
// would cost more storage than the dense matrix).
std::optional<LowRankFactor> compress_tensor(const NamedTensor& t,
                                             const CompressOptions& opts) {
  if (!t.is_matrix()) return std::nullopt;
  const std::int64_t m = t.rows();
  const std::int64_t n = t.cols();
  const std::int64_t min_dim = std::min(m, n);
  if (min_dim < opts.min_dim) return std::nullopt;

  const Eigen::MatrixXd a = to_matrix(t);
  const double total = a.squaredNorm();
  if (total == 0.0) return std::nullopt;  // zero spectrum: keep dense

  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd vt;
  std::size_t k = 0;
  double retained = 0.0;

  auto exact_path = [&] {
    const SvdResult r = dense_svd(a, t.name());
    const std::vector<double> sv(r.s.data(), r.s.data() + r.s.size());
    const std::vector<double> v = explained_variance(sv);
    k = select_rank(v, opts.tau);
    retained = v[k - 1];
    u = r.u.leftCols(static_cast<Eigen::Index>(k));
    s = r.s.head(static_cast<Eigen::Index>(k));
    vt = r.vt.topRows(static_cast<Eigen::Index>(k));
  };

  if (min_dim <= opts.dense_max_dim) {
    exact_path();
  } else {
    // Randomized path: grow the sketch until the conservative singular-value
    // estimates capture tau of the exact total squared Frobenius norm. If
    // the sketch stops being meaningfully smaller than the matrix, the exact
    // solver is cheaper anyway.
    RandomizedSvdOptions ropts;
    ropts.seed = derive_seed(opts.seed, t.name());
    int guess = 64;
    for (;;) {
      if (2 * (static_cast<std::int64_t>(guess) + ropts.oversample) >=
          min_dim) {
        exact_path();
        break;
      }
      const SvdResult r = randomized_svd(a, guess, ropts, t.name());
      double acc = 0.0;
      std::size_t found = 0;
      for (Eigen::Index i = 0; i < r.s.size(); ++i) {
        acc += r.s[i] * r.s[i];
        if (acc / total >= opts.tau) {
          found = static_cast<std::size_t>(i) + 1;
          break;
        }
      }
      if (found != 0) {
        k = found;
        retained = acc / total;
        u = r.u.leftCols(static_cast<Eigen::Index>(k));
        s = r.s.head(static_cast<Eigen::Index>(k));
        vt = r.vt.topRows(static_cast<Eigen::Index>(k));
        break;
      }
      guess *= 2;
    }
  }

  if (opts.storage_guard &&
      static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(m + n) >=
          static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(n)) {
    return std::nullopt;
  }

  const Eigen::VectorXd sqrt_s = s.array().sqrt();
  const Eigen::MatrixXd factor_b = u * sqrt_s.asDiagonal();
  const Eigen::MatrixXd factor_a = sqrt_s.asDiagonal() * vt;

  LowRankFactor f;
  f.name = t.name();
  f.rank = static_cast<std::int64_t>(k);
  f.retained_variance = retained;
  f.factor_b =
      from_matrix(t.name() + std::string(kFactorBSuffix), factor_b);
  f.factor_a =
      from_matrix(t.name() + std::string(kFactorASuffix), factor_a);
  return f;
}

}  // namespace

std::vector<double> explained_variance(const std::vector<double>& s) {
  double total = 0.0;
  for (double x : s) total += x * x;
  if (total == 0.0) {
    throw AllZero("explained variance undefined: all singular values are 0");
  }
  std::vector<double> v(s.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    acc += s[i] * s[i];
    v[i] = acc / total;
  }
  return v;
}

std::size_t select_rank(const std::vector<double>& v, double tau) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] >= tau) return i + 1;
  }
  return v.size();  // v_full == 1 >= tau up to rounding
}

Spectrum spectrum_of(const NamedTensor& matrix) {
  const SvdResult r = svd(matrix);
  Spectrum sp;
  sp.tensor_name = matrix.name();
  sp.singular_values.assign(r.s.data(), r.s.data() + r.s.size());
  sp.cumulative_variance = explained_variance(sp.singular_values);
  return sp;
}

LoreAdapter compress(const DeltaAdapter& delta, const CompressOptions& opts) {
  const auto& tensors = delta.tensors.tensors();
  std::vector<std::optional<LowRankFactor>> results(tensors.size());
  parallel_for(tensors.size(), opts.threads, [&](std::size_t i) {
    results[i] = compress_tensor(tensors[i], opts);
  });

  LoreAdapter lore;
  lore.tau = opts.tau;
  lore.base_digest = delta.base_digest;
  lore.instruct_digest = delta.instruct_digest;
  lore.metadata = delta.metadata;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (results[i]) {
      lore.factors.emplace(tensors[i].name(), std::move(*results[i]));
    } else {
      lore.dense.add(tensors[i]);
    }
  }
  return lore;
}

DeltaAdapter materialize(const LoreAdapter& lore, unsigned threads) {
  std::vector<const LowRankFactor*> factors;
  factors.reserve(lore.factors.size());
  for (const auto& [name, f] : lore.factors) factors.push_back(&f);

  std::vector<NamedTensor> expanded(factors.size());
  parallel_for(factors.size(), threads, [&](std::size_t i) {
    const Eigen::MatrixXd b = to_matrix(factors[i]->factor_b);
    const Eigen::MatrixXd a = to_matrix(factors[i]->factor_a);
    expanded[i] = from_matrix(factors[i]->name, b * a);
  });

  DeltaAdapter out;
  out.base_digest = lore.base_digest;
  out.instruct_digest = lore.instruct_digest;
  out.metadata = lore.metadata;
  for (auto& t : expanded) out.tensors.add(std::move(t));
  for (const auto& t : lore.dense.tensors()) out.tensors.add(t);
  return out;
}

ParamReport param_report(const LoreAdapter& lore, const Checkpoint& base) {
  ParamReport report;
  for (const auto& [name, f] : lore.factors) {
    ParamReport::Row row;
    row.name = name;
    row.rank = f.rank;
    row.params = static_cast<std::uint64_t>(f.rank) *
                 static_cast<std::uint64_t>(f.factor_b.rows() +
                                            f.factor_a.cols());
    row.retained_variance = f.retained_variance;
    report.rows.push_back(std::move(row));
  }
  for (const auto& t : lore.dense.tensors()) {
    ParamReport::Row row;
    row.name = t.name();
    row.rank = 0;
    row.params = static_cast<std::uint64_t>(t.element_count());
    row.retained_variance = 1.0;
    report.rows.push_back(std::move(row));
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });

  for (const auto& row : report.rows) report.lore_params += row.params;
  for (const auto& t : base.tensors()) {
    report.base_params += static_cast<std::uint64_t>(t.element_count());
  }
  report.percent_of_base =
      report.base_params == 0
          ? 0.0
          : 100.0 * static_cast<double>(report.lore_params) /
                static_cast<double>(report.base_params);
  return report;
}

std::vector<std::pair<double, double>> tau_sweep(const DeltaAdapter& delta,
                                                 const std::vector<double>& taus,
                                                 const Checkpoint& base,
                                                 CompressOptions opts) {
  std::vector<std::pair<double, double>> rows;
  rows.reserve(taus.size());
  for (double tau : taus) {
    opts.tau = tau;
    const ParamReport report = param_report(compress(delta, opts), base);
    rows.emplace_back(tau, report.percent_of_base);
  }
  return rows;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& spectrum) {
  os << "index,variance\n";
  for (std::size_t i = 0; i < spectrum.cumulative_variance.size(); ++i) {
    os << (i + 1) << ',' << std::setprecision(17)
       << spectrum.cumulative_variance[i] << '\n';
  }
}

void write_tau_sweep_csv(std::ostream& os,
                         const std::vector<std::pair<double, double>>& rows) {
  os << "tau,percent\n";
  for (const auto& [tau, percent] : rows) {
    os << std::setprecision(17) << tau << ',' << percent << '\n';
  }
}

void save_lore(const LoreAdapter& lore, const std::filesystem::path& path) {
  Checkpoint ckpt;
  nlohmann::json retained = nlohmann::json::object();
  for (const auto& [name, f] : lore.factors) {
    ckpt.add(f.factor_b);
    ckpt.add(f.factor_a);
    retained[name] = f.retained_variance;
  }
  for (const auto& t : lore.dense.tensors()) ckpt.add(t);
  ckpt.metadata() = lore.metadata;
  ckpt.metadata()["kind"] = "lore-adapter";
  ckpt.metadata()["tau"] = format_double(lore.tau);
  ckpt.metadata()["retained_variance"] = retained.dump();
  ckpt.metadata()["base_digest"] = lore.base_digest;
  ckpt.metadata()["instruct_digest"] = lore.instruct_digest;
  ckpt.metadata()["version"] = std::string(kVersion);
  save_checkpoint(ckpt, path);
}

LoreAdapter load_lore(const std::filesystem::path& path) {
  Checkpoint ckpt = load_checkpoint(path);
  LoreAdapter lore;

  auto& meta = ckpt.metadata();
  if (auto it = meta.find("kind");
      it != meta.end() && it->second != "lore-adapter") {
    throw FormatError(path.string() + ": container kind '" + it->second +
                      "' is not a lore adapter");
  }
  nlohmann::json retained = nlohmann::json::object();
  if (auto it = meta.find("retained_variance"); it != meta.end()) {
    try {
      retained = nlohmann::json::parse(it->second);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() +
                        ": bad retained_variance metadata: " + e.what());
    }
  }
  if (auto it = meta.find("tau"); it != meta.end()) {
    lore.tau = std::strtod(it->second.c_str(), nullptr);
  }
  if (auto it = meta.find("base_digest"); it != meta.end()) {
    lore.base_digest = it->second;
  }
  if (auto it = meta.find("instruct_digest"); it != meta.end()) {
    lore.instruct_digest = it->second;
  }
  for (const char* key :
       {"kind", "tau", "retained_variance", "base_digest", "instruct_digest"}) {
    meta.erase(key);
  }
  lore.metadata = meta;

  for (const auto& t : ckpt.tensors()) {
    const std::string& n = t.name();
    if (ends_with(n, kFactorBSuffix)) {
      const std::string stem = n.substr(0, n.size() - kFactorBSuffix.size());
      const std::string a_name = stem + std::string(kFactorASuffix);
      if (!ckpt.has(a_name)) {
        throw FormatError(path.string() + ": factor '" + n +
                          "' has no matching '" + a_name + "'");
      }
      const NamedTensor& fa = ckpt.get(a_name);
      if (!t.is_matrix() || !fa.is_matrix() || t.cols() != fa.rows()) {
        throw FormatError(path.string() + ": inconsistent factor shapes for '" +
                          stem + "'");
      }
      LowRankFactor f;
      f.name = stem;
      f.rank = t.cols();
      f.factor_b = t;
      f.factor_a = fa;
      f.retained_variance =
          retained.contains(stem) ? retained[stem].get<double>() : 1.0;
      lore.factors.emplace(stem, std::move(f));
    } else if (ends_with(n, kFactorASuffix)) {
      const std::string stem = n.substr(0, n.size() - kFactorASuffix.size());
      if (!ckpt.has(stem + std::string(kFactorBSuffix))) {
        throw FormatError(path.string() + ": factor '" + n +
                          "' has no matching '" + stem +
                          std::string(kFactorBSuffix) + "'");
      }
      // handled with its _b partner
    } else {
      lore.dense.add(t);
    }
  }
  return lore;
}

}  // namespace readapt
