#pragma once

// Independent brute-force oracles. These deliberately avoid the data
// structures the library uses (no rank maps, no incremental overlap): worse
// complexity, different algebra, same answers.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace oracles {

inline std::size_t position_of(const std::vector<std::string>& list,
                               const std::string& id) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i] == id) return i;
  }
  return list.size();
}

// Pair enumeration with linear position lookups.
inline double kendall(const std::vector<std::string>& a,
                      const std::vector<std::string>& b) {
  const std::size_t n = a.size();
  double concordant = 0;
  double discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // a[i] precedes a[j] in a by construction
      const bool same_in_b = position_of(b, a[i]) < position_of(b, a[j]);
      if (same_in_b) {
        concordant += 1;
      } else {
        discordant += 1;
      }
    }
  }
  return (concordant - discordant) / (0.5 * static_cast<double>(n) *
                                      static_cast<double>(n - 1));
}

// Pearson correlation of the two rank vectors (not the sum-of-d^2 shortcut).
inline double spearman(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  const std::size_t n = a.size();
  std::vector<double> ra(n), rb(n);
  for (std::size_t i = 0; i < n; ++i) {
    ra[i] = static_cast<double>(position_of(a, a[i]));
    rb[i] = static_cast<double>(position_of(b, a[i]));
  }
  double mean_a = 0, mean_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += ra[i];
    mean_b += rb[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double cov = 0, var_a = 0, var_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (ra[i] - mean_a) * (rb[i] - mean_b);
    var_a += (ra[i] - mean_a) * (ra[i] - mean_a);
    var_b += (rb[i] - mean_b) * (rb[i] - mean_b);
  }
  return cov / std::sqrt(var_a * var_b);
}

// Prefix agreements recomputed from scratch at every depth, then the
// extrapolated closed form.
inline double rbo_ext(const std::vector<std::string>& a,
                      const std::vector<std::string>& b, double p) {
  const std::size_t n = a.size();
  const auto overlap_at = [&](std::size_t depth) {
    double overlap = 0;
    for (std::size_t i = 0; i < depth; ++i) {
      for (std::size_t j = 0; j < depth; ++j) {
        if (a[i] == b[j]) overlap += 1;
      }
    }
    return overlap;
  };
  double sum = 0.0;
  for (std::size_t d = 1; d <= n; ++d) {
    sum += overlap_at(d) / static_cast<double>(d) * std::pow(p, static_cast<double>(d));
  }
  return (1.0 - p) / p * sum +
         overlap_at(n) / static_cast<double>(n) * std::pow(p, static_cast<double>(n));
}

// n-gram BLEU with map<vector<string>,int> counting.
inline double bleu(const std::vector<std::string>& cand,
                   const std::vector<std::string>& ref) {
  if (cand.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t order = 1; order <= 4; ++order) {
    std::map<std::vector<std::string>, int> cand_grams;
    std::map<std::vector<std::string>, int> ref_grams;
    for (std::size_t i = 0; i + order <= cand.size(); ++i) {
      cand_grams[std::vector<std::string>(cand.begin() + i, cand.begin() + i + order)]++;
    }
    for (std::size_t i = 0; i + order <= ref.size(); ++i) {
      ref_grams[std::vector<std::string>(ref.begin() + i, ref.begin() + i + order)]++;
    }
    double total = 0;
    double matched = 0;
    for (const auto& [gram, count] : cand_grams) {
      total += count;
      const auto it = ref_grams.find(gram);
      if (it != ref_grams.end()) matched += std::min(count, it->second);
    }
    const double precision =
        matched > 0 ? matched / total : (matched + 1.0) / (total + 1.0);
    log_sum += std::log(precision);
  }
  const double brevity =
      std::exp(std::min(0.0, 1.0 - static_cast<double>(ref.size()) /
                                       static_cast<double>(cand.size())));
  return brevity * std::exp(log_sum / 4.0);
}

}  // namespace oracles
