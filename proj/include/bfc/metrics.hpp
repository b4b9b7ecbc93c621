#pragma once

#include <span>
#include <vector>

namespace bfc {

// AP = (1/R) * sum over relevant ranks k of (relevant in top k) / k, where
// R is the number of relevant entries in the list. Summed exactly in
// rationals. Throws UndefinedAP when R = 0.
double average_precision(const std::vector<bool>& relevance);

// Two-level mean: each query's frame APs are averaged first, then the
// per-query values. Throws ConfigError when a query has no frames.
double mean_average_precision(std::span<const std::vector<double>> per_query_frame_aps);

double mean(std::span<const double> values);

}  // namespace bfc
