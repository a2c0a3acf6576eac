#include "qrnn/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "qrnn/errors.hpp"

namespace qrnn {

namespace {

void check_pair(const Trajectory& pred, const Trajectory& truth) {
    if (pred.size() != truth.size())
        raise(ErrorKind::length_mismatch, "prediction and truth lengths differ");
    if (pred.empty()) raise(ErrorKind::length_mismatch, "empty trajectories");
    for (std::size_t t = 0; t < pred.size(); ++t)
        if (pred[t].size() != truth[t].size())
            raise(ErrorKind::length_mismatch, "marker counts differ");
}

double sq_dist(const Vec3& p, const Vec3& q) {
    double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
    return dx * dx + dy * dy + dz * dz;
}

// Continued fraction for the regularized incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    const double fpmin = 1e-300, eps = 3e-16;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
    double x = dof / (dof + t * t);
    double p = 0.5 * incomplete_beta(dof / 2.0, 0.5, x);
    return t > 0.0 ? 1.0 - p : p;
}

}  // namespace

double rmse(const Trajectory& pred, const Trajectory& truth) {
    check_pair(pred, truth);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < pred.size(); ++t)
        for (std::size_t m = 0; m < pred[t].size(); ++m) {
            acc += sq_dist(pred[t][m], truth[t][m]);
            ++count;
        }
    return std::sqrt(acc / static_cast<double>(count));
}

double nrmse(const Trajectory& pred, const Trajectory& truth) {
    check_pair(pred, truth);
    std::size_t markers = truth.front().size();
    std::size_t count = truth.size() * markers;

    std::vector<Vec3> mean(markers);
    for (const auto& frame : truth)
        for (std::size_t m = 0; m < markers; ++m) {
            mean[m].x += frame[m].x;
            mean[m].y += frame[m].y;
            mean[m].z += frame[m].z;
        }
    for (auto& v : mean) {
        v.x /= static_cast<double>(truth.size());
        v.y /= static_cast<double>(truth.size());
        v.z /= static_cast<double>(truth.size());
    }

    double dev = 0.0;
    for (const auto& frame : truth)
        for (std::size_t m = 0; m < markers; ++m) dev += sq_dist(frame[m], mean[m]);
    dev = std::sqrt(dev / static_cast<double>(count));
    if (dev < 1e-9)
        raise(ErrorKind::degenerate_truth, "truth has no variability to normalize against");
    return rmse(pred, truth) / dev;
}

double mae(const Trajectory& pred, const Trajectory& truth) {
    check_pair(pred, truth);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < pred.size(); ++t)
        for (std::size_t m = 0; m < pred[t].size(); ++m) {
            acc += std::sqrt(sq_dist(pred[t][m], truth[t][m]));
            ++count;
        }
    return acc / static_cast<double>(count);
}

double jitter(const Trajectory& pred) {
    if (pred.size() < 2) raise(ErrorKind::series_too_short, "jitter needs at least two steps");
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 1; t < pred.size(); ++t)
        for (std::size_t m = 0; m < pred[t].size(); ++m) {
            acc += std::sqrt(sq_dist(pred[t][m], pred[t - 1][m]));
            ++count;
        }
    return acc / static_cast<double>(count);
}

MetricValues evaluate_trajectory(const Trajectory& pred, const Trajectory& truth) {
    MetricValues v;
    v.rmse = rmse(pred, truth);
    v.nrmse = nrmse(pred, truth);
    v.mae = mae(pred, truth);
    v.jitter = jitter(pred);
    return v;
}

double student_t_975(std::size_t dof) {
    if (dof == 0) raise(ErrorKind::insufficient_samples, "t quantile needs dof >= 1");
    double nu = static_cast<double>(dof);
    double lo = 0.0, hi = 1000.0;
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, nu) < 0.975)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

Ci ci95(const std::vector<double>& values) {
    if (values.size() < 2)
        raise(ErrorKind::insufficient_samples, "ci95 needs at least two values");
    double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    double sd = std::sqrt(var / n);
    double t = student_t_975(values.size() - 1);
    return {mean, t * sd / std::sqrt(n)};
}

}  // namespace qrnn
