#include "bfc/metrics.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include "bfc/error.hpp"

namespace bfc {

double average_precision(const std::vector<bool>& relevance) {
  using boost::multiprecision::cpp_rational;
  cpp_rational sum = 0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < relevance.size(); ++k) {
    if (!relevance[k]) continue;
    ++hits;
    sum += cpp_rational(hits, k + 1);
  }
  if (hits == 0) throw UndefinedAP("ranking contains no relevant document");
  sum /= hits;
  return static_cast<double>(sum);
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double mean_average_precision(std::span<const std::vector<double>> per_query) {
  if (per_query.empty()) throw ConfigError("no queries to average");
  std::vector<double> ap_q;
  ap_q.reserve(per_query.size());
  for (std::size_t q = 0; q < per_query.size(); ++q) {
    if (per_query[q].empty()) throw ConfigError("query " + std::to_string(q) + " has no frames");
    ap_q.push_back(mean(per_query[q]));
  }
  return mean(ap_q);
}

}  // namespace bfc
