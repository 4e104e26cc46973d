#include "aee/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "aee/errors.hpp"

namespace aee {

Summary summarize(std::span<const double> values, double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw ParameterError("confidence must lie in (0,1)");
    Summary s;
    s.count = values.size();
    if (s.count == 0) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.count);
    if (s.count < 2) return s;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.count - 1));
    const boost::math::students_t dist(static_cast<double>(s.count - 1));
    const double t = boost::math::quantile(dist, 0.5 + confidence / 2.0);
    s.halfwidth = t * s.stddev / std::sqrt(static_cast<double>(s.count));
    return s;
}

double welch_greater_p(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw ParameterError("Welch test needs two samples of size >= 2");
    const Summary sa = summarize(a);
    const Summary sb = summarize(b);
    const double va = sa.stddev * sa.stddev / static_cast<double>(sa.count);
    const double vb = sb.stddev * sb.stddev / static_cast<double>(sb.count);
    const double se = std::sqrt(va + vb);
    if (se == 0.0) return sa.mean > sb.mean ? 0.0 : 1.0;
    const double t = (sa.mean - sb.mean) / se;
    const double df = (va + vb) * (va + vb) /
                      (va * va / static_cast<double>(sa.count - 1) +
                       vb * vb / static_cast<double>(sb.count - 1));
    const boost::math::students_t dist(df);
    return boost::math::cdf(boost::math::complement(dist, t));
}

} // namespace aee
