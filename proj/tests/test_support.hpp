#pragma once

#include <array>
#include <string>
#include <vector>

#include "extsens/paired_data.hpp"
#include "extsens/rng.hpp"

namespace testsupport {

/// Pair records from responses and a treated-first flag per pair.
inline std::vector<extsens::PairRecord> make_pairs(
    const std::vector<std::array<double, 2>>& responses,
    const std::vector<int>& treated_first) {
  std::vector<extsens::PairRecord> out;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    extsens::PairRecord p;
    p.pair_id = "p" + std::to_string(i);
    p.r = responses[i];
    int tf = treated_first.empty() ? 1 : treated_first[i];
    p.z = tf ? std::array<int, 2>{1, 0} : std::array<int, 2>{0, 1};
    out.push_back(p);
  }
  return out;
}

/// Synthetic study with a shifted-normal effect; treated side randomized.
inline std::vector<extsens::PairRecord> random_study(std::size_t pairs,
                                                     double effect,
                                                     extsens::Rng& rng) {
  std::vector<extsens::PairRecord> out;
  for (std::size_t i = 0; i < pairs; ++i) {
    extsens::PairRecord p;
    p.pair_id = "p" + std::to_string(i);
    bool first = rng.bernoulli(0.5);
    double treated = effect + rng.normal();
    double control = rng.normal();
    p.r = first ? std::array<double, 2>{treated, control}
                : std::array<double, 2>{control, treated};
    p.z = first ? std::array<int, 2>{1, 0} : std::array<int, 2>{0, 1};
    out.push_back(p);
  }
  return out;
}

}  // namespace testsupport
