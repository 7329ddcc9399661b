#include "sepl/geomap.hpp"

#include "sepl/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sepl {

using Eigen::Matrix2d;
using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

double normalize_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

// ---------------------------------------------------------------------------
// Dead reckoning

namespace {

struct OdoPath {
    std::vector<double> t;      // t[0] is the path start, t[k+1] the time of measurement k
    std::vector<Vector3d> pose;  // cumulative (x, y, theta) in the odometry frame
    std::vector<double> dist;    // signed distance of the measurement ending at t[k]
    std::vector<double> dtheta;

    explicit OdoPath(std::span<const OdometryMeasurement> odometry) {
        if (odometry.empty()) return;
        const double first = odometry.front().timestamp;
        const double step = odometry.size() > 1 ? odometry[1].timestamp - first : 0.0;
        t.push_back(first - step);
        pose.push_back(Vector3d::Zero());
        dist.push_back(0.0);
        dtheta.push_back(0.0);
        for (const auto& m : odometry) {
            const Vector3d& p = pose.back();
            const double h = p.z() + 0.5 * m.dtheta;
            pose.push_back({p.x() + m.distance * std::cos(h), p.y() + m.distance * std::sin(h),
                            p.z() + m.dtheta});
            t.push_back(m.timestamp);
            dist.push_back(m.distance);
            dtheta.push_back(m.dtheta);
        }
    }

    bool empty() const { return t.empty(); }

    // Index k >= 1 of the segment (t[k-1], t[k]] holding `time`, or 0 at the
    // start point, or -1 outside the path.
    int segment(double time) const {
        if (t.empty() || time < t.front() || time > t.back()) return -1;
        if (time == t.front()) return 0;
        const auto it = std::lower_bound(t.begin(), t.end(), time);
        return static_cast<int>(it - t.begin());
    }

    Vector3d at(double time) const {
        const int k = segment(time);
        if (k <= 0) return pose.front();
        const double span = t[k] - t[k - 1];
        const double f = span > 0.0 ? (time - t[k - 1]) / span : 1.0;
        if (f >= 1.0) return pose[k];
        const Vector3d& p = pose[k - 1];
        const double h = p.z() + 0.5 * f * dtheta[k];
        return {p.x() + f * dist[k] * std::cos(h), p.y() + f * dist[k] * std::sin(h),
                p.z() + f * dtheta[k]};
    }
};

// Rotation angle best aligning centered `from` onto centered `to` (2-D Procrustes).
double fit_rotation(const std::vector<Vector2d>& from, const std::vector<Vector2d>& to) {
    Vector2d mf = Vector2d::Zero(), mt = Vector2d::Zero();
    for (std::size_t i = 0; i < from.size(); ++i) {
        mf += from[i];
        mt += to[i];
    }
    mf /= static_cast<double>(from.size());
    mt /= static_cast<double>(to.size());
    double dot = 0.0, crs = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
        const Vector2d a = from[i] - mf;
        const Vector2d b = to[i] - mt;
        dot += a.dot(b);
        crs += a.x() * b.y() - a.y() * b.x();
    }
    if (dot == 0.0 && crs == 0.0) return 0.0;
    return std::atan2(crs, dot);
}

Matrix2d rotation(double a) {
    Matrix2d r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

}  // namespace

std::vector<GnssFix> average_fixes(std::span<const GnssFix> fixes,
                                   std::span<const OdometryMeasurement> odometry,
                                   const FixAveragingConfig& config) {
    std::vector<GnssFix> out(fixes.begin(), fixes.end());
    if (fixes.empty()) return out;
    for (std::size_t i = 1; i < fixes.size(); ++i) {
        if (fixes[i].timestamp < fixes[i - 1].timestamp) throw Error("fixes are not time-sorted");
    }
    for (std::size_t i = 1; i < odometry.size(); ++i) {
        if (odometry[i].timestamp < odometry[i - 1].timestamp) {
            throw Error("odometry is not time-sorted");
        }
    }
    const OdoPath path(odometry);
    if (path.empty()) return out;

    // Constant-motion flag per path segment (index k >= 1).
    const int segments = static_cast<int>(path.t.size());
    std::vector<double> speed(static_cast<std::size_t>(segments), 0.0);
    for (int k = 1; k < segments; ++k) {
        const double dt = path.t[k] - path.t[k - 1];
        speed[k] = dt > 0.0 ? std::abs(path.dist[k]) / dt : 0.0;
    }
    std::vector<bool> constant(static_cast<std::size_t>(segments), false);
    const int half = std::max(config.speed_window, 1) / 2;
    for (int k = 1; k < segments; ++k) {
        const int lo = std::max(1, k - half);
        const int hi = std::min(segments - 1, k + half);
        double mean = 0.0;
        for (int j = lo; j <= hi; ++j) mean += speed[j];
        mean /= (hi - lo + 1);
        double var = 0.0;
        for (int j = lo; j <= hi; ++j) var += (speed[j] - mean) * (speed[j] - mean);
        var /= (hi - lo + 1);
        constant[k] = std::sqrt(var) <= config.max_speed_variation * mean + 1e-12;
    }

    auto is_constant = [&](const GnssFix& f) -> bool {
        const int k = path.segment(f.timestamp);
        if (k < 0) return false;
        return constant[static_cast<std::size_t>(std::max(k, 1))];
    };

    const std::size_t cap = static_cast<std::size_t>(std::max(config.max_window_fixes, 1));
    std::size_t i = 0;
    while (i < fixes.size()) {
        if (!is_constant(fixes[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < fixes.size() && j - i < cap && is_constant(fixes[j])) ++j;
        const std::size_t n = j - i;
        if (n >= 2) {
            std::vector<Vector2d> odo(n), pos(n);
            double var_sum = 0.0;
            for (std::size_t q = 0; q < n; ++q) {
                const Vector3d o = path.at(fixes[i + q].timestamp);
                odo[q] = o.head<2>();
                pos[q] = {fixes[i + q].x, fixes[i + q].y};
                var_sum += fixes[i + q].sigma * fixes[i + q].sigma;
            }
            const Matrix2d r = rotation(fit_rotation(odo, pos));
            Vector2d mean_pos = Vector2d::Zero(), mean_odo = Vector2d::Zero();
            for (std::size_t q = 0; q < n; ++q) {
                mean_pos += pos[q];
                mean_odo += odo[q];
            }
            mean_pos /= static_cast<double>(n);
            mean_odo /= static_cast<double>(n);
            const double sigma = std::sqrt(var_sum / static_cast<double>(n)) /
                                 std::sqrt(static_cast<double>(n));
            for (std::size_t q = 0; q < n; ++q) {
                const Vector2d p = mean_pos + r * (odo[q] - mean_odo);
                out[i + q].x = p.x();
                out[i + q].y = p.y();
                out[i + q].sigma = sigma;
            }
        }
        i = j;
    }
    return out;
}

// ---------------------------------------------------------------------------
// UKF

SigmaWeights sigma_weights(int n, const UkfParams& params) {
    SigmaWeights w;
    w.lambda = params.alpha * params.alpha * (n + params.kappa) - n;
    const double c = n + w.lambda;
    w.mean.assign(static_cast<std::size_t>(2 * n + 1), 1.0 / (2.0 * c));
    w.covariance = w.mean;
    w.mean[0] = w.lambda / c;
    w.covariance[0] = w.mean[0] + (1.0 - params.alpha * params.alpha + params.beta);
    return w;
}

namespace {

Vector3d state_of(const Pose2D& p) { return {p.x, p.y, p.theta}; }

Vector3d state_diff(const Vector3d& a, const Vector3d& b) {
    Vector3d d = a - b;
    d.z() = normalize_angle(d.z());
    return d;
}

Matrix3d symmetrize(const Matrix3d& m) { return 0.5 * (m + m.transpose()); }

void check_psd(const Matrix3d& p) {
    if (!p.allFinite()) throw Error("filter divergence");
    const Eigen::SelfAdjointEigenSolver<Matrix3d> es(p, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9) throw Error("filter divergence");
}

// Symmetric square root of a PSD matrix; tiny negative eigenvalues are clipped.
Matrix3d psd_sqrt(const Matrix3d& m) {
    const Eigen::SelfAdjointEigenSolver<Matrix3d> es(m);
    const Vector3d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

std::vector<Vector3d> sigma_points(const Vector3d& mean, const Matrix3d& cov, double c) {
    const Matrix3d s = psd_sqrt(c * cov);
    std::vector<Vector3d> pts;
    pts.reserve(7);
    pts.push_back(mean);
    for (int i = 0; i < 3; ++i) pts.push_back(mean + s.col(i));
    for (int i = 0; i < 3; ++i) pts.push_back(mean - s.col(i));
    return pts;
}

Vector3d motion(const Vector3d& s, double d, double dtheta) {
    const double h = s.z() + 0.5 * dtheta;
    return {s.x() + d * std::cos(h), s.y() + d * std::sin(h), s.z() + dtheta};
}

}  // namespace

Pose2D ukf_predict(const Pose2D& pose, const OdometryMeasurement& odom, const UkfParams& params) {
    const auto& nz = odom.noise;
    if (!(nz.per_mm >= 0.0) || !(nz.per_rad >= 0.0) || !(nz.floor_mm >= 0.0) || !(nz.floor_rad >= 0.0)) {
        throw Error("odometry noise parameters must be non-negative");
    }
    check_psd(pose.covariance);
    const SigmaWeights w = sigma_weights(3, params);
    const Vector3d mu = state_of(pose);
    auto pts = sigma_points(mu, pose.covariance, 3.0 + w.lambda);
    for (auto& p : pts) p = motion(p, odom.distance, odom.dtheta);

    Vector3d mean = pts[0];
    for (std::size_t i = 1; i < pts.size(); ++i) mean += w.mean[i] * state_diff(pts[i], pts[0]);
    Matrix3d cov = Matrix3d::Zero();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vector3d d = state_diff(pts[i], mean);
        cov += w.covariance[i] * d * d.transpose();
    }

    const double h = pose.theta + 0.5 * odom.dtheta;
    Eigen::Matrix<double, 3, 2> g;
    g << std::cos(h), -0.5 * odom.distance * std::sin(h), std::sin(h),
        0.5 * odom.distance * std::cos(h), 0.0, 1.0;
    const double sd = nz.floor_mm + nz.per_mm * std::abs(odom.distance);
    const double st = nz.floor_rad + nz.per_rad * std::abs(odom.dtheta);
    const Eigen::Vector2d q(sd * sd, st * st);
    cov += g * q.asDiagonal() * g.transpose();

    Pose2D out;
    out.x = mean.x();
    out.y = mean.y();
    out.theta = normalize_angle(mean.z());
    out.covariance = symmetrize(cov);
    check_psd(out.covariance);
    return out;
}

Pose2D ukf_update(const Pose2D& pose, const GnssFix& fix, const UkfParams& params) {
    if (!(fix.sigma > 0.0)) throw Error("GNSS sigma must be positive");
    check_psd(pose.covariance);
    const SigmaWeights w = sigma_weights(3, params);
    const Vector3d mu = state_of(pose);
    const auto pts = sigma_points(mu, pose.covariance, 3.0 + w.lambda);

    Vector2d zhat = pts[0].head<2>();
    for (std::size_t i = 1; i < pts.size(); ++i) {
        zhat += w.mean[i] * (pts[i].head<2>() - pts[0].head<2>());
    }
    Matrix2d s = Matrix2d::Identity() * (fix.sigma * fix.sigma);
    Eigen::Matrix<double, 3, 2> pxz = Eigen::Matrix<double, 3, 2>::Zero();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vector2d dz = pts[i].head<2>() - zhat;
        s += w.covariance[i] * dz * dz.transpose();
        pxz += w.covariance[i] * state_diff(pts[i], mu) * dz.transpose();
    }
    const Eigen::Matrix<double, 3, 2> k = pxz * s.inverse();
    const Vector3d mean = mu + k * (Vector2d(fix.x, fix.y) - zhat);
    const Matrix3d cov = pose.covariance - k * s * k.transpose();

    Pose2D out;
    out.x = mean.x();
    out.y = mean.y();
    out.theta = normalize_angle(mean.z());
    out.covariance = symmetrize(cov);
    check_psd(out.covariance);
    return out;
}

double estimate_initial_heading(std::span<const GnssFix> fixes,
                                std::span<const OdometryMeasurement> odometry, double span_mm) {
    const OdoPath path(odometry);
    if (path.empty() || fixes.empty()) return 0.0;
    std::vector<Vector2d> odo, pos;
    double travelled = 0.0;
    Vector2d last = Vector2d::Zero();
    for (const auto& f : fixes) {
        if (path.segment(f.timestamp) < 0) continue;
        const Vector3d o = path.at(f.timestamp);
        if (!odo.empty()) travelled += (o.head<2>() - last).norm();
        last = o.head<2>();
        odo.push_back(o.head<2>());
        pos.push_back({f.x, f.y});
        if (travelled >= span_mm) break;
    }
    if (odo.size() < 2 || travelled <= 0.0) return 0.0;
    return normalize_angle(fit_rotation(odo, pos));
}

std::vector<TimedPose> fuse_trajectory(std::span<const GnssFix> fixes,
                                       std::span<const OdometryMeasurement> odometry,
                                       double initial_heading, const UkfParams& params) {
    if (fixes.empty()) throw Error("fuse_trajectory: no GNSS fixes to start from");
    Pose2D pose;
    pose.x = fixes.front().x;
    pose.y = fixes.front().y;
    pose.theta = normalize_angle(initial_heading);
    const double s2 = fixes.front().sigma * fixes.front().sigma;
    pose.covariance = Eigen::Vector3d(s2, s2, 0.01).asDiagonal();

    std::vector<TimedPose> out;
    out.push_back({fixes.front().timestamp, pose});
    std::size_t next_fix = 1;
    double prev_t = fixes.front().timestamp;
    for (const auto& m : odometry) {
        if (m.timestamp <= fixes.front().timestamp) continue;
        pose = ukf_predict(pose, m, params);
        while (next_fix < fixes.size() && fixes[next_fix].timestamp <= m.timestamp) {
            if (fixes[next_fix].timestamp > prev_t) pose = ukf_update(pose, fixes[next_fix], params);
            ++next_fix;
        }
        prev_t = m.timestamp;
        out.push_back({m.timestamp, pose});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Projection

Point2 project_detection(const Detection& det, const Pose2D& pose, const CameraConfig& cam) {
    if (!cam.nadir) throw Error("only nadir cameras are supported");
    const double scale = cam.height_mm / cam.focal_px;
    const double lx = (det.x - cam.cx) * scale + cam.mount_x_mm;
    const double ly = (det.y - cam.cy) * scale + cam.mount_y_mm;
    const double c = std::cos(pose.theta), s = std::sin(pose.theta);
    return {pose.x + c * lx - s * ly, pose.y + s * lx + c * ly};
}

Point2 world_to_pixel(const Point2& world, const Pose2D& pose, const CameraConfig& cam) {
    if (!cam.nadir) throw Error("only nadir cameras are supported");
    const double dx = world.x - pose.x, dy = world.y - pose.y;
    const double c = std::cos(pose.theta), s = std::sin(pose.theta);
    const double lx = c * dx + s * dy;
    const double ly = -s * dx + c * dy;
    const double scale = cam.focal_px / cam.height_mm;
    return {(lx - cam.mount_x_mm) * scale + cam.cx, (ly - cam.mount_y_mm) * scale + cam.cy};
}

}  // namespace sepl
