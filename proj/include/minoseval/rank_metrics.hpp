#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "minoseval/core.hpp"

namespace minoseval {

// Agreement between one produced and one gold ranking. Defined only for
// n >= 2; singleton samples are excluded from aggregation and counted
// separately by the caller.
struct AgreementReport {
  double kendall_tau = 0.0;
  double spearman_rho = 0.0;
  std::map<double, double> rbo;  // persistence p -> value
  std::size_t n = 0;
};

// (concordant - discordant) / C(n,2). Preconditions: same id set, n >= 2;
// ties cannot occur (Ranking is a strict order).
double kendall_tau(const std::vector<std::string>& a,
                   const std::vector<std::string>& b);
double kendall_tau(const Ranking& a, const Ranking& b);

// 1 - 6 * sum(d^2) / (n (n^2 - 1)).
double spearman_rho(const std::vector<std::string>& a,
                    const std::vector<std::string>& b);
double spearman_rho(const Ranking& a, const Ranking& b);

// Extrapolated rank-biased overlap over two full conjoint lists; exact for
// complete permutations of the same set. p in (0,1); lower p weights the
// top ranks more.
double rbo(const std::vector<std::string>& a, const std::vector<std::string>& b,
           double p);
double rbo(const Ranking& a, const Ranking& b, double p);

AgreementReport agreement(const Ranking& produced, const Ranking& gold,
                          const std::vector<double>& rbo_ps);

struct MetricStat {
  double mean = 0.0;
  std::optional<double> std_dev;  // sample std across subset means; >= 2 subsets
};

struct AggregateReport {
  MetricStat kendall_tau;
  MetricStat spearman_rho;
  std::map<double, MetricStat> rbo;
  std::size_t sample_count = 0;
  std::size_t subset_count = 0;  // 0 = no subset structure
};

// Unweighted mean per metric across samples. With subset ids (one per
// report): mean of subset means, sample standard deviation across subset
// means. Errors: EmptyInput.
AggregateReport aggregate(const std::vector<AgreementReport>& reports,
                          const std::vector<int>* subset_ids = nullptr);

}  // namespace minoseval
