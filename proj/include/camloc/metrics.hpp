#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "camloc/region.hpp"
#include "camloc/tensor.hpp"

namespace camloc {

enum class LesionType { Hemorrhage = 0, HardExudate = 1, SoftExudate = 2, RedSmallDot = 3 };

constexpr int kLesionTypeCount = 4;

inline const char* lesion_name(LesionType t) {
    switch (t) {
        case LesionType::Hemorrhage: return "Hemorrhage";
        case LesionType::HardExudate: return "HardExudate";
        case LesionType::SoftExudate: return "SoftExudate";
        case LesionType::RedSmallDot: return "RedSmallDot";
    }
    return "?";
}

// Pixel set with fused per-pixel expert confidence, parallel to `pixels`.
struct GroundTruthRegion {
    PixelSet pixels;
    LesionType lesion_type = LesionType::Hemorrhage;
    std::vector<float> confidence;
};

// Everything needed to evaluate one image at both levels.
struct ImageEval {
    std::string id;
    std::vector<RegionProposal> proposals;
    std::vector<GroundTruthRegion> ground_truth;
    double classifier_score = 0.0;  // score for the diseased class
    int label = 0;                  // 0 healthy, 1 diseased
};

// Both sets sorted ascending (PixelSet invariant).
inline int64_t intersection_count(const PixelSet& a, const PixelSet& b) {
    int64_t n = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else { ++n; ++i; ++j; }
    }
    return n;
}

inline double iou(const PixelSet& a, const PixelSet& b) {
    check(!a.empty() && !b.empty(), "iou: pixel sets must be non-empty");
    const int64_t inter = intersection_count(a, b);
    const int64_t uni = int64_t(a.size()) + int64_t(b.size()) - inter;
    return double(inter) / double(uni);
}

// Fraction of the ground-truth region covered by the proposal: |G∩P| / |G|.
inline double overlap_fraction(const PixelSet& gt, const PixelSet& proposal) {
    check(!gt.empty(), "overlap: ground truth must be non-empty");
    return double(intersection_count(gt, proposal)) / double(gt.size());
}

// Image-level TP under the 50%-coverage criterion (inclusive boundary).
inline bool image_tp_50(const std::vector<RegionProposal>& proposals,
                        const std::vector<const GroundTruthRegion*>& gts) {
    for (const auto* g : gts)
        for (const auto& p : proposals)
            if (overlap_fraction(g->pixels, p.pixels) >= 0.5) return true;
    return false;
}

// Image-level TP when a proposal shares one pixel of confidence >= 0.75.
inline bool image_tp_onepixel(const std::vector<RegionProposal>& proposals,
                              const std::vector<const GroundTruthRegion*>& gts) {
    for (const auto* g : gts) {
        for (const auto& p : proposals) {
            size_t i = 0, j = 0;
            while (i < g->pixels.size() && j < p.pixels.size()) {
                if (g->pixels[i] < p.pixels[j]) ++i;
                else if (p.pixels[j] < g->pixels[i]) ++j;
                else {
                    if (g->confidence[i] >= 0.75f) return true;
                    ++i; ++j;
                }
            }
        }
    }
    return false;
}

struct LesionCounts {
    int tp_count = 0;
    int fp_count = 0;
    int detected_gt_count = 0;
};

// Lesion-level counting at score threshold t (S_i >= t active).
// A G_j is detected when some active proposal covers >= 50% of it. An active
// proposal intersecting no G_j, or whose mean IoU over intersected G_j is
// below 0.5, counts as a false positive.
inline LesionCounts lesion_level_label(const std::vector<RegionProposal>& proposals,
                                       const std::vector<const GroundTruthRegion*>& gts,
                                       double t) {
    LesionCounts out;
    std::vector<bool> detected(gts.size(), false);
    for (const auto& p : proposals) {
        if (double(p.score) < t) continue;
        double iou_sum = 0.0;
        int touched = 0;
        for (size_t j = 0; j < gts.size(); ++j) {
            const int64_t inter = intersection_count(gts[j]->pixels, p.pixels);
            if (inter == 0) continue;
            ++touched;
            const int64_t uni =
                int64_t(gts[j]->pixels.size()) + int64_t(p.pixels.size()) - inter;
            iou_sum += double(inter) / double(uni);
            if (double(inter) / double(gts[j]->pixels.size()) >= 0.5) detected[j] = true;
        }
        if (touched == 0 || iou_sum / touched < 0.5) ++out.fp_count;
        else ++out.tp_count;
    }
    for (bool d : detected)
        if (d) ++out.detected_gt_count;
    return out;
}

struct FrocPoint {
    double threshold;
    double fps_per_image;
    double sensitivity;
};

struct FrocCurve {
    LesionType lesion_type = LesionType::Hemorrhage;
    std::vector<FrocPoint> points;  // in increasing threshold order
};

inline std::vector<const GroundTruthRegion*> gts_of_type(const ImageEval& img, LesionType t) {
    std::vector<const GroundTruthRegion*> out;
    for (const auto& g : img.ground_truth)
        if (g.lesion_type == t) out.push_back(&g);
    return out;
}

// Threshold sweep over the distinct proposal scores plus +inf. All images,
// healthy included, count in the FPs/image denominator.
inline FrocCurve froc(const std::vector<ImageEval>& images, LesionType type) {
    check(!images.empty(), "froc: need at least one image");
    int total_gt = 0;
    std::vector<double> thresholds;
    for (const auto& img : images) {
        total_gt += static_cast<int>(gts_of_type(img, type).size());
        for (const auto& p : img.proposals) thresholds.push_back(double(p.score));
    }
    check(total_gt > 0, "froc: no ground truth of type " + std::string(lesion_name(type)));
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    thresholds.push_back(std::numeric_limits<double>::infinity());

    FrocCurve curve;
    curve.lesion_type = type;
    for (double t : thresholds) {
        int detected = 0, fps = 0;
        for (const auto& img : images) {
            const auto gts = gts_of_type(img, type);
            const LesionCounts c = lesion_level_label(img.proposals, gts, t);
            detected += c.detected_gt_count;
            fps += c.fp_count;
        }
        curve.points.push_back({t, double(fps) / double(images.size()),
                                double(detected) / double(total_gt)});
    }
    return curve;
}

// AUC via the Mann-Whitney rank statistic; ties contribute 1/2.
inline double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check(scores.size() == labels.size(), "auc: one label per score");
    std::vector<size_t> idx(scores.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    int64_t n_pos = 0, n_neg = 0;
    double rank_sum_pos = 0.0;
    size_t i = 0;
    double rank = 1.0;
    while (i < idx.size()) {
        size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        const double avg_rank = (rank + rank + double(j - i) - 1.0) / 2.0;
        for (size_t k = i; k < j; ++k) {
            if (labels[idx[k]] == 1) { ++n_pos; rank_sum_pos += avg_rank; }
            else ++n_neg;
        }
        rank += double(j - i);
        i = j;
    }
    check(n_pos > 0 && n_neg > 0, "auc: both classes must be present");
    return (rank_sum_pos - double(n_pos) * (double(n_pos) + 1.0) / 2.0) /
           (double(n_pos) * double(n_neg));
}

// Published reference values, shown alongside computed results for context.
struct PaperReference {
    double auc = 0.954;
    double sensitivity = 0.936;
    double specificity = 0.976;
    // image-level sensitivity %, 50% overlap then one-pixel, order H/HE/SE/RSD
    std::array<double, 4> image_se_50 = {97.2, 93.3, 81.8, 50.0};
    std::array<double, 4> image_se_onepixel = {97.2, 100.0, 90.9, 50.0};
    // lesion-level (SE%, FPs/image), 50% overlap rows of the comparison table
    std::array<std::pair<double, double>, 4> lesion_50 = {
        std::pair{72.0, 2.25}, std::pair{47.0, 1.9}, std::pair{71.0, 1.45}, std::pair{21.0, 2.0}};
    std::array<std::pair<double, double>, 4> lesion_onepixel = {
        std::pair{91.0, 1.5}, std::pair{87.0, 1.5}, std::pair{89.0, 1.5}, std::pair{52.0, 1.5}};
};

struct LesionTypeReport {
    int images_with_type = 0;      // sensitivity denominator
    double sensitivity_50 = -1.0;  // -1 marks undefined (no denominator)
    double sensitivity_onepixel = -1.0;
    double operating_sensitivity = -1.0;  // lesion level at the operating threshold
    double operating_fps_per_image = -1.0;
    FrocCurve froc;
};

struct EvalReport {
    std::array<LesionTypeReport, kLesionTypeCount> per_type;
    int healthy_images = 0, diseased_images = 0;
    double specificity = -1.0;  // healthy classified healthy, image level
    double classification_sensitivity = -1.0;
    double classification_auc = -1.0;
    double operating_threshold = 0.0;
    double classification_threshold = 0.5;
    PaperReference reference;
};

inline EvalReport report(const std::vector<ImageEval>& images, double operating_threshold,
                         double classification_threshold = 0.5) {
    EvalReport rep;
    rep.operating_threshold = operating_threshold;
    rep.classification_threshold = classification_threshold;

    for (int ti = 0; ti < kLesionTypeCount; ++ti) {
        const auto type = static_cast<LesionType>(ti);
        auto& tr = rep.per_type[static_cast<size_t>(ti)];
        tr.froc.lesion_type = type;
        int tp50 = 0, tp1 = 0, total_gt = 0, detected = 0, fps = 0;
        for (const auto& img : images) {
            const auto gts = gts_of_type(img, type);
            if (!gts.empty()) {
                ++tr.images_with_type;
                if (image_tp_50(img.proposals, gts)) ++tp50;
                if (image_tp_onepixel(img.proposals, gts)) ++tp1;
            }
            const LesionCounts c = lesion_level_label(img.proposals, gts, operating_threshold);
            total_gt += static_cast<int>(gts.size());
            detected += c.detected_gt_count;
            fps += c.fp_count;
        }
        if (tr.images_with_type > 0) {
            tr.sensitivity_50 = double(tp50) / tr.images_with_type;
            tr.sensitivity_onepixel = double(tp1) / tr.images_with_type;
        }
        if (total_gt > 0) {
            tr.operating_sensitivity = double(detected) / total_gt;
            tr.operating_fps_per_image = double(fps) / double(images.size());
            tr.froc = froc(images, type);
        }
    }

    int healthy_correct = 0, diseased_correct = 0;
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& img : images) {
        scores.push_back(img.classifier_score);
        labels.push_back(img.label);
        if (img.label == 0) {
            ++rep.healthy_images;
            if (img.classifier_score < classification_threshold) ++healthy_correct;
        } else {
            ++rep.diseased_images;
            if (img.classifier_score >= classification_threshold) ++diseased_correct;
        }
    }
    if (rep.healthy_images > 0) rep.specificity = double(healthy_correct) / rep.healthy_images;
    if (rep.diseased_images > 0)
        rep.classification_sensitivity = double(diseased_correct) / rep.diseased_images;
    if (rep.healthy_images > 0 && rep.diseased_images > 0)
        rep.classification_auc = roc_auc(scores, labels);
    return rep;
}

}  // namespace camloc
