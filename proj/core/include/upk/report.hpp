#pragma once

#include "upk/pose_tracker.hpp"
#include "upk/seg_metrics.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace upk {

enum class ReportFormat { markdown, csv, json };

std::optional<ReportFormat> parse_report_format(const std::string& text);
const char* file_extension(ReportFormat format);

// Fixed four decimals, the precision of the published mean-DSC table.
std::string fixed4(double value);

// Per-frame and aggregate segmentation accuracy for several models.
struct EvalReport {
    std::vector<std::string> model_ids;
    std::vector<std::string> labels;
    // scores[model_id][label], ordered by frame
    std::map<std::string, std::map<std::string, std::vector<FrameScore>>> scores;

    // nullopt when no frame qualifies (only possible with nonempty_gt_only).
    std::optional<AggregateScore> aggregate_for(const std::string& model_id, const std::string& label,
                                                bool nonempty_gt_only) const;
};

// Rows are labels; columns are Object, Frames, then one mean-DSC column per
// model in model_ids order.
std::string render_dsc_table(const EvalReport& report, ReportFormat format, bool nonempty_gt_only = false);

// frame,label,dsc,iou,pred_area,gt_area
std::string scores_to_csv(const std::vector<FrameScore>& scores);
std::string failures_to_csv(const std::vector<FailureFlag>& flags, const std::string& label);

std::string format_histogram(const StatusHistogram& h);

} // namespace upk
