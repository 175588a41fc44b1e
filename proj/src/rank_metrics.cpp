#include "minoseval/rank_metrics.hpp"

#include <cmath>
#include <unordered_map>

namespace minoseval {

namespace {

// rank (0-based position) per id, validating that b covers the same ids.
std::pair<std::unordered_map<std::string, std::size_t>,
          std::unordered_map<std::string, std::size_t>>
rank_maps(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() < 2) {
    throw Error(ErrorCode::NotEnoughItems,
                "rank agreement needs at least 2 items, got " +
                    std::to_string(a.size()));
  }
  if (a.size() != b.size()) {
    throw Error(ErrorCode::IdSetMismatch,
                "rankings differ in length: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
  std::unordered_map<std::string, std::size_t> pos_a;
  std::unordered_map<std::string, std::size_t> pos_b;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!pos_a.emplace(a[i], i).second) {
      throw Error(ErrorCode::IdSetMismatch, "duplicate id '" + a[i] + "'");
    }
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!pos_a.count(b[i])) {
      throw Error(ErrorCode::IdSetMismatch,
                  "id '" + b[i] + "' missing from the other ranking");
    }
    if (!pos_b.emplace(b[i], i).second) {
      throw Error(ErrorCode::IdSetMismatch, "duplicate id '" + b[i] + "'");
    }
  }
  return {std::move(pos_a), std::move(pos_b)};
}

}  // namespace

double kendall_tau(const std::vector<std::string>& a,
                   const std::vector<std::string>& b) {
  const auto [pos_a, pos_b] = rank_maps(a, b);
  const std::size_t n = a.size();
  long long concordant = 0;
  long long discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto da = static_cast<long long>(pos_a.at(a[i])) -
                      static_cast<long long>(pos_a.at(a[j]));
      const auto db = static_cast<long long>(pos_b.at(a[i])) -
                      static_cast<long long>(pos_b.at(a[j]));
      if (da * db > 0) {
        ++concordant;
      } else {
        ++discordant;  // no ties by construction
      }
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(concordant - discordant) / pairs;
}

double kendall_tau(const Ranking& a, const Ranking& b) {
  return kendall_tau(a.order, b.order);
}

double spearman_rho(const std::vector<std::string>& a,
                    const std::vector<std::string>& b) {
  const auto [pos_a, pos_b] = rank_maps(a, b);
  const double n = static_cast<double>(a.size());
  double d2_sum = 0.0;
  for (const auto& id : a) {
    const double d = static_cast<double>(pos_a.at(id)) -
                     static_cast<double>(pos_b.at(id));
    d2_sum += d * d;
  }
  return 1.0 - 6.0 * d2_sum / (n * (n * n - 1.0));
}

double spearman_rho(const Ranking& a, const Ranking& b) {
  return spearman_rho(a.order, b.order);
}

double rbo(const std::vector<std::string>& a, const std::vector<std::string>& b,
           double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::InvalidP, "p must lie in (0,1), got " + std::to_string(p));
  }
  rank_maps(a, b);  // validation only
  const std::size_t n = a.size();

  // Incremental overlap: flags bit 1 = seen in a, bit 2 = seen in b.
  std::unordered_map<std::string, int> flags;
  const auto add = [&flags](const std::string& id, int bit) {
    int& f = flags[id];
    const bool counted = (f & (bit == 1 ? 2 : 1)) != 0;
    f |= bit;
    return counted;
  };

  double overlap = 0.0;
  double weighted_sum = 0.0;
  double p_pow = 1.0;  // p^d
  for (std::size_t d = 1; d <= n; ++d) {
    if (add(a[d - 1], 1)) overlap += 1.0;
    if (add(b[d - 1], 2)) overlap += 1.0;
    p_pow *= p;
    weighted_sum += (overlap / static_cast<double>(d)) * p_pow;
  }
  // For conjoint full lists the residual term is the final agreement
  // overlap/n carried by the tail weight p^n.
  return (1.0 - p) / p * weighted_sum +
         (overlap / static_cast<double>(n)) * p_pow;
}

double rbo(const Ranking& a, const Ranking& b, double p) {
  return rbo(a.order, b.order, p);
}

AgreementReport agreement(const Ranking& produced, const Ranking& gold,
                          const std::vector<double>& rbo_ps) {
  AgreementReport report;
  report.kendall_tau = kendall_tau(produced, gold);
  report.spearman_rho = spearman_rho(produced, gold);
  for (double p : rbo_ps) report.rbo[p] = rbo(produced, gold, p);
  report.n = produced.order.size();
  return report;
}

namespace {

struct Accumulator {
  double sum = 0.0;
  std::size_t count = 0;
  void add(double v) {
    sum += v;
    ++count;
  }
  double mean() const { return sum / static_cast<double>(count); }
};

MetricStat stat_from_values(const std::vector<double>& values) {
  MetricStat stat;
  double sum = 0.0;
  for (double v : values) sum += v;
  stat.mean = sum / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - stat.mean) * (v - stat.mean);
    stat.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return stat;
}

}  // namespace

AggregateReport aggregate(const std::vector<AgreementReport>& reports,
                          const std::vector<int>* subset_ids) {
  if (reports.empty()) {
    throw Error(ErrorCode::EmptyInput, "no agreement reports to aggregate");
  }
  const auto& p_keys = reports.front().rbo;
  for (const auto& r : reports) {
    if (r.rbo.size() != p_keys.size()) {
      throw Error(ErrorCode::Config, "reports carry different rbo p sets");
    }
    for (const auto& [p, _] : p_keys) {
      if (!r.rbo.count(p)) {
        throw Error(ErrorCode::Config, "reports carry different rbo p sets");
      }
    }
  }

  AggregateReport out;
  out.sample_count = reports.size();

  if (subset_ids == nullptr || subset_ids->empty()) {
    std::vector<double> k, s;
    std::map<double, std::vector<double>> r;
    for (const auto& report : reports) {
      k.push_back(report.kendall_tau);
      s.push_back(report.spearman_rho);
      for (const auto& [p, v] : report.rbo) r[p].push_back(v);
    }
    out.kendall_tau.mean = stat_from_values(k).mean;
    out.spearman_rho.mean = stat_from_values(s).mean;
    for (const auto& [p, values] : r) out.rbo[p].mean = stat_from_values(values).mean;
    out.subset_count = 0;
    return out;
  }

  if (subset_ids->size() != reports.size()) {
    throw Error(ErrorCode::Config, "one subset id per report is required");
  }

  // subset means first, then mean/std across subsets
  std::map<int, Accumulator> k_acc, s_acc;
  std::map<int, std::map<double, Accumulator>> r_acc;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const int subset = (*subset_ids)[i];
    k_acc[subset].add(reports[i].kendall_tau);
    s_acc[subset].add(reports[i].spearman_rho);
    for (const auto& [p, v] : reports[i].rbo) r_acc[subset][p].add(v);
  }
  std::vector<double> k_means, s_means;
  std::map<double, std::vector<double>> r_means;
  for (const auto& [subset, acc] : k_acc) k_means.push_back(acc.mean());
  for (const auto& [subset, acc] : s_acc) s_means.push_back(acc.mean());
  for (const auto& [subset, per_p] : r_acc) {
    for (const auto& [p, acc] : per_p) r_means[p].push_back(acc.mean());
  }
  out.kendall_tau = stat_from_values(k_means);
  out.spearman_rho = stat_from_values(s_means);
  for (const auto& [p, values] : r_means) out.rbo[p] = stat_from_values(values);
  out.subset_count = k_acc.size();
  if (out.subset_count < 2) {
    out.kendall_tau.std_dev.reset();
    out.spearman_rho.std_dev.reset();
    for (auto& [p, stat] : out.rbo) stat.std_dev.reset();
  }
  return out;
}

}  // namespace minoseval
