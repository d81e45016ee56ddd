#include "sensauth/selection.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sensauth {

void SelectionConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha: must lie in (0, 1)");
  }
  if (!(corr_threshold > 0.0 && corr_threshold <= 1.0)) {
    throw ValidationError("corr_threshold: must lie in (0, 1]");
  }
  if (!(drop_rule >= 0.0 && drop_rule < 1.0)) {
    throw ValidationError("drop_rule: must lie in [0, 1)");
  }
}

void LabeledFeatureSet::validate() const {
  if (per_user.size() < 2) throw ValidationError("per_user: need >= 2 users");
  if (user_ids.size() != per_user.size()) {
    throw ValidationError("user_ids: size mismatch with per_user");
  }
  const auto cols = static_cast<Eigen::Index>(feature_names.size());
  for (std::size_t u = 0; u < per_user.size(); ++u) {
    if (per_user[u].rows() < 2) {
      throw ValidationError("per_user[" + std::to_string(u) +
                            "]: need >= 2 rows");
    }
    if (per_user[u].cols() != cols) {
      throw ValidationError("per_user[" + std::to_string(u) +
                            "]: column count mismatch with feature_names");
    }
  }
}

double fisher_score(const std::vector<std::vector<double>>& classes) {
  if (classes.size() < 2) throw ValidationError("classes: need >= 2 classes");
  for (const auto& c : classes) {
    if (c.size() < 2) throw ValidationError("classes: need >= 2 samples each");
  }

  double total = 0.0;
  double grand_sum = 0.0;
  for (const auto& c : classes) {
    for (double v : c) grand_sum += v;
    total += static_cast<double>(c.size());
  }
  const double grand_mean = grand_sum / total;

  double between = 0.0;
  double within = 0.0;
  for (const auto& c : classes) {
    const double n = static_cast<double>(c.size());
    double sum = 0.0;
    for (double v : c) sum += v;
    const double mu = sum / n;
    double ss = 0.0;
    for (double v : c) ss += (v - mu) * (v - mu);
    between += n * (mu - grand_mean) * (mu - grand_mean);
    within += ss;  // == n * population variance
  }

  if (between == 0.0) return 0.0;
  if (within == 0.0) return std::numeric_limits<double>::infinity();
  return between / within;
}

double fisher_score(const LabeledFeatureSet& set, std::size_t feature) {
  set.validate();
  if (feature >= set.feature_names.size()) {
    throw ValidationError("feature: index out of range");
  }
  std::vector<std::vector<double>> classes;
  classes.reserve(set.per_user.size());
  for (const auto& m : set.per_user) {
    const auto col = m.col(static_cast<Eigen::Index>(feature));
    classes.emplace_back(col.begin(), col.end());
  }
  return fisher_score(classes);
}

namespace {

// Survival function of the Kolmogorov distribution, Q(lambda) =
// 2 * sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2), evaluated through the
// theta-function form for small lambda where the alternating series is slow.
double kolmogorov_sf(double lambda) {
  if (lambda < 1e-8) return 1.0;
  if (lambda < 1.18) {
    const double t = std::exp(-M_PI * M_PI / (8.0 * lambda * lambda));
    const double sum = t + std::pow(t, 9.0) + std::pow(t, 25.0) +
                       std::pow(t, 49.0);
    return 1.0 - std::sqrt(2.0 * M_PI) / lambda * sum;
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 16; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw ValidationError("samples: each side needs >= 2 values");
  }
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());

  double d = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }

  // Effective size with the usual finite-sample correction of the
  // asymptotic argument.
  const double ne = na * nb / (na + nb);
  const double sqrt_ne = std::sqrt(ne);
  const double lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
  return {d, kolmogorov_sf(lambda)};
}

std::vector<ScreenVerdict> ks_feature_screen(
    const std::vector<std::vector<double>>& pvalues_per_feature,
    const SelectionConfig& config) {
  config.validate();
  std::vector<ScreenVerdict> out;
  out.reserve(pvalues_per_feature.size());
  for (std::size_t f = 0; f < pvalues_per_feature.size(); ++f) {
    const auto& ps = pvalues_per_feature[f];
    std::size_t high = 0;
    for (double p : ps) {
      if (p > config.alpha) ++high;
    }
    const double frac =
        ps.empty() ? 0.0 : static_cast<double>(high) / static_cast<double>(ps.size());
    out.push_back({f, !(frac > config.drop_rule), frac});
  }
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("samples: length mismatch");
  if (a.size() < 2) throw ValidationError("samples: need >= 2 values");

  const double n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;

  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw ValidationError("samples: correlation undefined for constant input");
  }
  return sab / std::sqrt(saa * sbb);
}

std::vector<std::size_t> redundancy_prune(const Eigen::MatrixXd& corr,
                                          const SelectionConfig& config) {
  config.validate();
  const Eigen::Index n = corr.rows();
  if (corr.cols() != n) throw ValidationError("corr: matrix must be square");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(corr(i, i) - 1.0) > 1e-9) {
      throw ValidationError("corr: diagonal must be 1");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(corr(i, j) - corr(j, i)) > 1e-9) {
        throw ValidationError("corr: matrix must be symmetric");
      }
    }
  }

  std::vector<bool> alive(static_cast<std::size_t>(n), true);
  std::vector<std::size_t> dropped;

  auto mean_abs = [&](Eigen::Index f) {
    double sum = 0.0;
    int cnt = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == f || !alive[static_cast<std::size_t>(j)]) continue;
      sum += std::abs(corr(f, j));
      ++cnt;
    }
    return cnt == 0 ? 0.0 : sum / cnt;
  };

  for (;;) {
    Eigen::Index bi = -1;
    Eigen::Index bj = -1;
    double best = config.corr_threshold;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!alive[static_cast<std::size_t>(i)]) continue;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (!alive[static_cast<std::size_t>(j)]) continue;
        if (std::abs(corr(i, j)) >= best &&
            (bi < 0 || std::abs(corr(i, j)) > best)) {
          best = std::abs(corr(i, j));
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0) break;
    const Eigen::Index victim = mean_abs(bi) > mean_abs(bj) ? bi : bj;
    alive[static_cast<std::size_t>(victim)] = false;
    dropped.push_back(static_cast<std::size_t>(victim));
  }
  return dropped;
}

namespace {

std::array<double, 3> quartiles(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    const double pos = q * (static_cast<double>(v.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
  };
  return {at(0.25), at(0.5), at(0.75)};
}

}  // namespace

SelectionReport run_selection(const LabeledFeatureSet& set,
                              const SelectionConfig& config) {
  set.validate();
  config.validate();

  const std::size_t n_feat = set.feature_names.size();
  const std::size_t n_users = set.per_user.size();

  SelectionReport report;
  report.feature_names = set.feature_names;

  // Fisher score and pairwise KS p-values per feature.
  std::vector<std::vector<double>> pvals(n_feat);
  for (std::size_t f = 0; f < n_feat; ++f) {
    report.fisher.push_back(fisher_score(set, f));
    for (std::size_t u = 0; u < n_users; ++u) {
      const auto cu = set.per_user[u].col(static_cast<Eigen::Index>(f));
      for (std::size_t v = u + 1; v < n_users; ++v) {
        const auto cv = set.per_user[v].col(static_cast<Eigen::Index>(f));
        pvals[f].push_back(
            ks_two_sample({cu.data(), static_cast<std::size_t>(cu.size())},
                          {cv.data(), static_cast<std::size_t>(cv.size())})
                .p);
      }
    }
    report.p_quartiles.push_back(quartiles(pvals[f]));
  }
  report.screen = ks_feature_screen(pvals, config);

  std::vector<std::size_t> survivors;
  for (const auto& sv : report.screen) {
    if (sv.keep) survivors.push_back(sv.feature);
  }

  // Mean correlation over users among survivors. Constant columns contribute
  // zero correlation (they carry no pairwise information).
  const auto ns = static_cast<Eigen::Index>(survivors.size());
  Eigen::MatrixXd mean_corr = Eigen::MatrixXd::Identity(ns, ns);
  for (Eigen::Index i = 0; i < ns; ++i) {
    for (Eigen::Index j = i + 1; j < ns; ++j) {
      double sum = 0.0;
      int cnt = 0;
      for (std::size_t u = 0; u < n_users; ++u) {
        const auto a = set.per_user[u].col(
            static_cast<Eigen::Index>(survivors[static_cast<std::size_t>(i)]));
        const auto b = set.per_user[u].col(
            static_cast<Eigen::Index>(survivors[static_cast<std::size_t>(j)]));
        try {
          sum += pearson({a.data(), static_cast<std::size_t>(a.size())},
                         {b.data(), static_cast<std::size_t>(b.size())});
          ++cnt;
        } catch (const ValidationError&) {
        }
      }
      mean_corr(i, j) = mean_corr(j, i) = cnt == 0 ? 0.0 : sum / cnt;
    }
  }
  report.mean_corr = mean_corr;
  report.corr_kept = survivors;

  const auto pruned_local = redundancy_prune(mean_corr, config);
  std::vector<bool> dead(n_feat, false);
  for (std::size_t f = 0; f < n_feat; ++f) {
    bool surv = false;
    for (auto s : survivors) surv |= (s == f);
    dead[f] = !surv;
  }
  for (auto p : pruned_local) {
    report.pruned.push_back(survivors[p]);
    dead[survivors[p]] = true;
  }
  for (std::size_t f = 0; f < n_feat; ++f) {
    if (!dead[f]) report.kept.push_back(set.feature_names[f]);
  }
  return report;
}

std::string SelectionReport::to_json_string() const {
  nlohmann::json j;
  j["features"] = feature_names;
  for (std::size_t f = 0; f < feature_names.size(); ++f) {
    nlohmann::json row;
    row["name"] = feature_names[f];
    row["fisher_score"] = fisher[f];
    row["p_value_quartiles"] = {{"q1", p_quartiles[f][0]},
                                {"median", p_quartiles[f][1]},
                                {"q3", p_quartiles[f][2]}};
    row["kept_after_screen"] = screen[f].keep;
    row["frac_nonsignificant"] = screen[f].frac_nonsignificant;
    j["per_feature"].push_back(row);
  }
  nlohmann::json corr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < mean_corr.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index jx = 0; jx < mean_corr.cols(); ++jx) {
      row.push_back(mean_corr(i, jx));
    }
    corr.push_back(row);
  }
  j["mean_correlation"] = corr;
  nlohmann::json corr_names = nlohmann::json::array();
  for (auto f : corr_kept) corr_names.push_back(feature_names[f]);
  j["mean_correlation_features"] = corr_names;
  nlohmann::json pr = nlohmann::json::array();
  for (auto f : pruned) pr.push_back(feature_names[f]);
  j["pruned_redundant"] = pr;
  j["kept"] = kept;
  return j.dump(2);
}

}  // namespace sensauth
