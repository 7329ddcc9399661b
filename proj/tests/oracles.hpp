#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. They are deliberately naive and share no code with the library
// beyond its data types.

#include "sepl/detect_eval.hpp"
#include "sepl/network.hpp"
#include "sepl/raster.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using sepl::Point2;

// Per-pixel minimum over all points.
inline std::vector<float> distance_transform(const std::vector<sepl::Pixel>& pts, int w, int h) {
    std::vector<float> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            for (const auto& p : pts) {
                const std::int64_t dx = x - p.x, dy = y - p.y;
                best = std::min(best, dx * dx + dy * dy);
            }
            out[static_cast<std::size_t>(y) * w + x] =
                static_cast<float>(std::sqrt(static_cast<double>(best)));
        }
    }
    return out;
}

struct OtsuSplit {
    int k = 0;                 // last background bin
    std::vector<bool> foreground;
};

// Tries every split k and evaluates sigma_b^2 = w0 w1 (mu0 - mu1)^2 from
// scratch with class probabilities and bin-index means.
inline OtsuSplit otsu(const std::vector<float>& v, int bins) {
    const float lo = *std::min_element(v.begin(), v.end());
    const float hi = *std::max_element(v.begin(), v.end());
    auto bin = [&](float x) {
        int b = static_cast<int>((static_cast<double>(x) - lo) / (static_cast<double>(hi) - lo) * bins);
        return std::clamp(b, 0, bins - 1);
    };
    std::vector<double> score(static_cast<std::size_t>(bins - 1), 0.0);
    const double n = static_cast<double>(v.size());
    for (int k = 0; k + 1 < bins; ++k) {
        double c0 = 0, c1 = 0, s0 = 0, s1 = 0;
        for (float x : v) {
            const int b = bin(x);
            if (b <= k) {
                c0 += 1;
                s0 += b;
            } else {
                c1 += 1;
                s1 += b;
            }
        }
        if (c0 == 0 || c1 == 0) continue;
        const double w0 = c0 / n, w1 = c1 / n;
        const double d = s0 / c0 - s1 / c1;
        score[static_cast<std::size_t>(k)] = w0 * w1 * d * d;
    }
    const double best = *std::max_element(score.begin(), score.end());
    OtsuSplit out;
    for (int k = 0; k + 1 < bins; ++k) {
        if (score[static_cast<std::size_t>(k)] >= best * (1.0 - 1e-12)) {
            out.k = k;
            break;
        }
    }
    for (float x : v) out.foreground.push_back(bin(x) > out.k);
    return out;
}

// Area centroid from counting sample points of a fine grid inside the polygon.
inline Point2 rasterized_centroid(const std::vector<Point2>& poly, double step) {
    double minx = 1e300, miny = 1e300, maxx = -1e300, maxy = -1e300;
    for (const auto& p : poly) {
        minx = std::min(minx, p.x);
        miny = std::min(miny, p.y);
        maxx = std::max(maxx, p.x);
        maxy = std::max(maxy, p.y);
    }
    double sx = 0, sy = 0, n = 0;
    for (double y = miny + step / 2; y < maxy; y += step) {
        for (double x = minx + step / 2; x < maxx; x += step) {
            bool in = false;
            for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
                if ((poly[i].y > y) != (poly[j].y > y) &&
                    x < (poly[j].x - poly[i].x) * (y - poly[i].y) / (poly[j].y - poly[i].y) + poly[i].x) {
                    in = !in;
                }
            }
            if (in) {
                sx += x;
                sy += y;
                n += 1;
            }
        }
    }
    return {sx / n, sy / n};
}

// Step-by-step greedy assignment: repeatedly take the most confident
// unprocessed detection (earliest on ties) and give it the nearest free GT.
struct GreedyResult {
    std::vector<int> gt_of_det;  // -1 for false positives
    std::vector<double> dist;
};

inline GreedyResult greedy_match(const std::vector<sepl::Detection>& dets,
                                 const std::vector<Point2>& gts, double thr) {
    GreedyResult r;
    r.gt_of_det.assign(dets.size(), -1);
    r.dist.assign(dets.size(), 0.0);
    std::vector<bool> done(dets.size(), false), taken(gts.size(), false);
    for (std::size_t step = 0; step < dets.size(); ++step) {
        int pick = -1;
        for (std::size_t i = 0; i < dets.size(); ++i) {
            if (done[i]) continue;
            if (pick < 0 || dets[i].confidence > dets[static_cast<std::size_t>(pick)].confidence) {
                pick = static_cast<int>(i);
            }
        }
        done[static_cast<std::size_t>(pick)] = true;
        const auto& d = dets[static_cast<std::size_t>(pick)];
        int best = -1;
        double bd = 1e300;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (taken[g]) continue;
            const double dd = std::hypot(gts[g].x - d.x, gts[g].y - d.y);
            if (dd < bd) {
                bd = dd;
                best = static_cast<int>(g);
            }
        }
        if (best >= 0 && bd <= thr) {
            taken[static_cast<std::size_t>(best)] = true;
            r.gt_of_det[static_cast<std::size_t>(pick)] = best;
            r.dist[static_cast<std::size_t>(pick)] = bd;
        }
    }
    return r;
}

// Precision and recall when keeping only detections with confidence >= cutoff.
inline std::pair<double, double> pr_at(const std::vector<sepl::Detection>& dets,
                                       const std::vector<Point2>& gts, double thr,
                                       double cutoff) {
    std::vector<sepl::Detection> kept;
    for (const auto& d : dets)
        if (d.confidence >= cutoff) kept.push_back(d);
    const auto g = greedy_match(kept, gts, thr);
    double tp = 0;
    for (int x : g.gt_of_det) tp += x >= 0 ? 1 : 0;
    const double p = kept.empty() ? 1.0 : tp / static_cast<double>(kept.size());
    return {p, tp / static_cast<double>(gts.size())};
}

// Sign pattern of every ReLU input and the argmax of every pooling window.
template <typename T>
std::vector<int> activation_signature(const sepl::BasicNetwork<T>& net,
                                      const sepl::BasicTensor<T>& input) {
    const auto trace = sepl::forward_trace(net, input);
    std::vector<int> sig;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& in = i == 0 ? input : trace[i - 1];
        if (net.layers[i].kind == sepl::LayerKind::Relu) {
            for (T v : in.data) sig.push_back(v > 0 ? 1 : 0);
        } else if (net.layers[i].kind == sepl::LayerKind::Downsample2) {
            for (int c = 0; c < in.channels; ++c)
                for (int y = 0; y + 1 < in.height; y += 2)
                    for (int x = 0; x + 1 < in.width; x += 2) {
                        int arg = 0;
                        T best = in.at(c, y, x);
                        for (int k = 1; k < 4; ++k) {
                            const T v = in.at(c, y + k / 2, x + k % 2);
                            if (v > best) {
                                best = v;
                                arg = k;
                            }
                        }
                        sig.push_back(arg);
                    }
        }
    }
    return sig;
}

// Central difference of the loss with respect to one parameter. The step
// shrinks until the activation pattern is the same on both sides.
inline double numeric_gradient(sepl::BasicNetwork<double> net, const sepl::BasicTensor<double>& in,
                               const sepl::BasicTensor<double>& target, std::size_t layer,
                               std::size_t index, double eps = 1e-3) {
    const double w0 = net.layers[layer].params[index];
    for (int attempt = 0; attempt < 6; ++attempt, eps /= 10.0) {
        net.layers[layer].params[index] = w0 + eps;
        const auto sig_p = activation_signature(net, in);
        const double lp = sepl::loss(sepl::forward(net, in), target);
        net.layers[layer].params[index] = w0 - eps;
        const auto sig_m = activation_signature(net, in);
        const double lm = sepl::loss(sepl::forward(net, in), target);
        if (sig_p == sig_m || attempt == 5) return (lp - lm) / (2.0 * eps);
    }
    return 0.0;
}

// Closed-form Kalman filter for (x, y) with known constant heading.
struct LinearKf {
    Eigen::Vector2d x;
    Eigen::Matrix2d P;

    void predict(double d, double heading, double sigma_d) {
        const Eigen::Vector2d g(std::cos(heading), std::sin(heading));
        x += d * g;
        P += sigma_d * sigma_d * g * g.transpose();
    }
    void update(const Eigen::Vector2d& z, double sigma) {
        const Eigen::Matrix2d S = P + sigma * sigma * Eigen::Matrix2d::Identity();
        const Eigen::Matrix2d K = P * S.inverse();
        x += K * (z - x);
        P = (Eigen::Matrix2d::Identity() - K) * P;
    }
};

// Connected groups under "closer than r", merged to the weighted mean.
struct Cluster {
    double x = 0, y = 0;
    int members = 0;
};

inline std::vector<Cluster> transitive_clusters(const std::vector<Point2>& pts,
                                                const std::vector<double>& w, double r) {
    const std::size_t n = pts.size();
    std::vector<int> label(n, -1);
    int next = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (label[s] >= 0) continue;
        label[s] = next;
        std::vector<std::size_t> stack{s};
        while (!stack.empty()) {
            const std::size_t a = stack.back();
            stack.pop_back();
            for (std::size_t b = 0; b < n; ++b) {
                if (label[b] < 0 && std::hypot(pts[a].x - pts[b].x, pts[a].y - pts[b].y) < r) {
                    label[b] = next;
                    stack.push_back(b);
                }
            }
        }
        ++next;
    }
    std::vector<Cluster> out(static_cast<std::size_t>(next));
    std::vector<double> wsum(static_cast<std::size_t>(next), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& c = out[static_cast<std::size_t>(label[i])];
        c.x += w[i] * pts[i].x;
        c.y += w[i] * pts[i].y;
        c.members += 1;
        wsum[static_cast<std::size_t>(label[i])] += w[i];
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k].x /= wsum[k];
        out[k].y /= wsum[k];
    }
    return out;
}

}  // namespace oracle
