#pragma once

#include "upk/raster.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace upk {

struct FrameScore {
    std::size_t frame = 0;
    std::string label;
    double dsc = 0.0;
    double iou = 0.0;
    std::size_t pred_area = 0;
    std::size_t gt_area = 0;
};

struct AggregateScore {
    std::string label;
    std::size_t frame_count = 0;
    double mean_dsc = 0.0;
    double mean_iou = 0.0;
    std::string model_id;
};

enum class FailureReason { low_dsc, area_discontinuity, empty_prediction };

struct FailureFlag {
    std::size_t frame = 0;
    FailureReason reason = FailureReason::low_dsc;
    double detail = 0.0;
};

const char* to_string(FailureReason reason);

// Set cardinalities of a mask pair, counted exactly.
struct OverlapCounts {
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t both = 0;
};

OverlapCounts overlap(const BitMask& a, const BitMask& b);

// 2|A∩B| / (|A|+|B|); 1.0 when both masks are empty. Throws DimensionMismatch.
double dice(const BitMask& a, const BitMask& b);
double dice(const OverlapCounts& c);

// |A∩B| / |A∪B|; 1.0 when both masks are empty.
double iou(const BitMask& a, const BitMask& b);
double iou(const OverlapCounts& c);

FrameScore score_frame(std::size_t frame, const std::string& label, const BitMask& pred, const BitMask& gt);

// One score per frame in index order. Throws FrameSetMismatch listing the
// symmetric difference of the two index sets.
std::vector<FrameScore> score_sequence(const std::map<std::size_t, BitMask>& pred,
                                       const std::map<std::size_t, BitMask>& gt, const std::string& label);

// Throws EmptyInput or MixedLabels.
AggregateScore aggregate(const std::vector<FrameScore>& scores, const std::string& model_id);

// Scores restricted to frames whose ground truth is nonempty.
std::vector<FrameScore> nonempty_gt(const std::vector<FrameScore>& scores);

inline constexpr double kDefaultDscThreshold = 0.5;
inline constexpr double kDefaultAreaJumpRatio = 3.0;

// Flags low DSC, sudden predicted-area jumps between consecutive scores, and
// empty predictions against nonempty ground truth. Throws BadThreshold.
std::vector<FailureFlag> mine_failures(const std::vector<FrameScore>& scores,
                                       double dsc_threshold = kDefaultDscThreshold,
                                       double area_jump_ratio = kDefaultAreaJumpRatio);

} // namespace upk
