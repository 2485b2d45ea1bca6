#include "upk/seg_metrics.hpp"

#include "upk/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace upk {

const char* to_string(FailureReason reason)
{
    switch (reason) {
    case FailureReason::low_dsc: return "low_dsc";
    case FailureReason::area_discontinuity: return "area_discontinuity";
    case FailureReason::empty_prediction: return "empty_prediction";
    }
    return "unknown";
}

OverlapCounts overlap(const BitMask& a, const BitMask& b)
{
    if (a.width() != b.width() || a.height() != b.height())
        throw DimensionMismatch("cannot compare " + std::to_string(a.width()) + "x" + std::to_string(a.height())
                                + " mask with " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
    OverlapCounts c;
    const auto& ab = a.bits();
    const auto& bb = b.bits();
    for (std::size_t i = 0; i < ab.size(); ++i) {
        c.a += ab[i];
        c.b += bb[i];
        c.both += ab[i] & bb[i];
    }
    return c;
}

double dice(const OverlapCounts& c)
{
    const std::size_t denom = c.a + c.b;
    if (denom == 0)
        return 1.0;
    return static_cast<double>(2 * c.both) / static_cast<double>(denom);
}

double iou(const OverlapCounts& c)
{
    const std::size_t uni = c.a + c.b - c.both;
    if (uni == 0)
        return 1.0;
    return static_cast<double>(c.both) / static_cast<double>(uni);
}

double dice(const BitMask& a, const BitMask& b) { return dice(overlap(a, b)); }
double iou(const BitMask& a, const BitMask& b) { return iou(overlap(a, b)); }

FrameScore score_frame(std::size_t frame, const std::string& label, const BitMask& pred, const BitMask& gt)
{
    const auto c = overlap(pred, gt);
    return {frame, label, dice(c), iou(c), c.a, c.b};
}

std::vector<FrameScore> score_sequence(const std::map<std::size_t, BitMask>& pred,
                                       const std::map<std::size_t, BitMask>& gt, const std::string& label)
{
    std::vector<std::size_t> only_pred, only_gt;
    for (const auto& [i, m] : pred)
        if (!gt.count(i))
            only_pred.push_back(i);
    for (const auto& [i, m] : gt)
        if (!pred.count(i))
            only_gt.push_back(i);
    if (!only_pred.empty() || !only_gt.empty()) {
        std::ostringstream msg;
        msg << "frame sets differ; prediction only: [";
        for (std::size_t k = 0; k < only_pred.size(); ++k)
            msg << (k ? "," : "") << only_pred[k];
        msg << "], ground truth only: [";
        for (std::size_t k = 0; k < only_gt.size(); ++k)
            msg << (k ? "," : "") << only_gt[k];
        msg << "]";
        throw FrameSetMismatch(msg.str());
    }

    std::vector<FrameScore> out;
    out.reserve(pred.size());
    for (const auto& [i, p] : pred)
        out.push_back(score_frame(i, label, p, gt.at(i)));
    return out;
}

AggregateScore aggregate(const std::vector<FrameScore>& scores, const std::string& model_id)
{
    if (scores.empty())
        throw EmptyInput("aggregate: no scores");
    AggregateScore agg;
    agg.label = scores.front().label;
    agg.model_id = model_id;
    agg.frame_count = scores.size();
    double dsc_sum = 0.0, iou_sum = 0.0;
    for (const auto& s : scores) {
        if (s.label != agg.label)
            throw MixedLabels("aggregate: labels '" + agg.label + "' and '" + s.label + "' mixed");
        dsc_sum += s.dsc;
        iou_sum += s.iou;
    }
    agg.mean_dsc = dsc_sum / static_cast<double>(scores.size());
    agg.mean_iou = iou_sum / static_cast<double>(scores.size());
    return agg;
}

std::vector<FrameScore> nonempty_gt(const std::vector<FrameScore>& scores)
{
    std::vector<FrameScore> out;
    for (const auto& s : scores)
        if (s.gt_area > 0)
            out.push_back(s);
    return out;
}

std::vector<FailureFlag> mine_failures(const std::vector<FrameScore>& scores, double dsc_threshold,
                                       double area_jump_ratio)
{
    if (!(dsc_threshold >= 0.0 && dsc_threshold <= 1.0))
        throw BadThreshold("dsc threshold must lie in [0, 1]");
    if (!(area_jump_ratio > 1.0))
        throw BadThreshold("area jump ratio must exceed 1");

    std::vector<FailureFlag> flags;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        const auto& s = scores[k];
        if (s.dsc < dsc_threshold)
            flags.push_back({s.frame, FailureReason::low_dsc, s.dsc});
        if (k > 0) {
            const auto prev = scores[k - 1].pred_area;
            if (prev != 0 || s.pred_area != 0) {
                const double ratio = prev == 0 ? std::numeric_limits<double>::infinity()
                                               : static_cast<double>(s.pred_area) / static_cast<double>(prev);
                if (ratio > area_jump_ratio || ratio < 1.0 / area_jump_ratio)
                    flags.push_back({s.frame, FailureReason::area_discontinuity, ratio});
            }
        }
        if (s.pred_area == 0 && s.gt_area > 0)
            flags.push_back({s.frame, FailureReason::empty_prediction, static_cast<double>(s.gt_area)});
    }
    return flags;
}

} // namespace upk
