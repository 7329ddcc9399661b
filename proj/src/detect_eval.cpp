#include "sepl/detect_eval.hpp"

#include "sepl/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace sepl {

int MatchOutcome::true_positives() const {
    return static_cast<int>(std::count_if(detections.begin(), detections.end(),
                                          [](const DetectionMatch& m) { return m.true_positive; }));
}

int MatchOutcome::false_positives() const {
    return static_cast<int>(detections.size()) - true_positives();
}

namespace {

std::vector<std::size_t> confidence_order(std::span<const Detection> dets) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].confidence > dets[b].confidence;
    });
    return order;
}

}  // namespace

MatchOutcome match(std::span<const Detection> dets, std::span<const Point2> gts,
                   double threshold) {
    if (!(threshold > 0.0)) throw Error("match threshold must be positive");
    MatchOutcome out;
    out.detections.resize(dets.size());
    out.gt_matched.assign(gts.size(), false);
    for (std::size_t di : confidence_order(dets)) {
        double best = std::numeric_limits<double>::infinity();
        int best_gt = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (out.gt_matched[g]) continue;
            const double d = std::hypot(dets[di].x - gts[g].x, dets[di].y - gts[g].y);
            if (d < best) {
                best = d;
                best_gt = static_cast<int>(g);
            }
        }
        if (best_gt >= 0 && best <= threshold) {
            out.detections[di] = {true, best_gt, best};
            out.gt_matched[static_cast<std::size_t>(best_gt)] = true;
        }
    }
    return out;
}

PrCurve pr_curve(std::span<const ImageEval> images, double threshold) {
    struct Scored {
        double confidence;
        bool tp;
    };
    std::vector<Scored> all;
    std::size_t gt_total = 0;
    for (const auto& img : images) {
        const MatchOutcome m = match(img.detections, img.ground_truth, threshold);
        gt_total += img.ground_truth.size();
        for (std::size_t i = 0; i < img.detections.size(); ++i) {
            all.push_back({img.detections[i].confidence, m.detections[i].true_positive});
        }
    }
    if (gt_total == 0) throw Error("no ground truth");
    std::stable_sort(all.begin(), all.end(),
                     [](const Scored& a, const Scored& b) { return a.confidence > b.confidence; });

    PrCurve curve;
    curve.threshold = threshold;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        (all[i].tp ? tp : fp) += 1;
        const bool group_end = i + 1 == all.size() || all[i + 1].confidence != all[i].confidence;
        if (!group_end) continue;
        curve.points.push_back({all[i].confidence,
                                static_cast<double>(tp) / static_cast<double>(tp + fp),
                                static_cast<double>(tp) / static_cast<double>(gt_total)});
    }
    return curve;
}

PrCurve pr_curve(std::span<const Detection> dets, std::span<const Point2> gts, double threshold) {
    const ImageEval one{{dets.begin(), dets.end()}, {gts.begin(), gts.end()}};
    return pr_curve(std::span<const ImageEval>(&one, 1), threshold);
}

double average_precision(const PrCurve& curve) {
    std::vector<PrPoint> pts = curve.points;
    std::stable_sort(pts.begin(), pts.end(),
                     [](const PrPoint& a, const PrPoint& b) { return a.recall < b.recall; });
    double envelope = 0.0;
    std::vector<double> env(pts.size());
    for (std::size_t i = pts.size(); i-- > 0;) {
        envelope = std::max(envelope, pts[i].precision);
        env[i] = envelope;
    }
    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        ap += (pts[i].recall - prev_recall) * env[i];
        prev_recall = pts[i].recall;
    }
    return ap;
}

AcceptedDistance mean_accepted_distance(std::span<const ImageEval> images, double acceptance) {
    if (!(acceptance > 0.0)) throw Error("acceptance must be positive");
    AcceptedDistance out;
    double sum = 0.0;
    for (const auto& img : images) {
        const MatchOutcome m = match(img.detections, img.ground_truth, acceptance);
        for (const auto& d : m.detections) {
            if (!d.true_positive) continue;
            sum += d.distance;
            ++out.accepted;
        }
    }
    if (out.accepted > 0) out.mad_px = sum / out.accepted;
    out.ap = average_precision(pr_curve(images, acceptance));
    return out;
}

AcceptedDistance mean_accepted_distance(std::span<const Detection> dets,
                                        std::span<const Point2> gts, double acceptance) {
    const ImageEval one{{dets.begin(), dets.end()}, {gts.begin(), gts.end()}};
    return mean_accepted_distance(std::span<const ImageEval>(&one, 1), acceptance);
}

std::string pr_curve_to_csv(const PrCurve& curve) {
    std::ostringstream out;
    out << "cutoff,precision,recall\n" << std::setprecision(10);
    for (const auto& p : curve.points) out << p.cutoff << "," << p.precision << "," << p.recall << "\n";
    return out.str();
}

}  // namespace sepl
