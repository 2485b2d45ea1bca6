#include "upk/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>

namespace upk {

std::optional<ReportFormat> parse_report_format(const std::string& text)
{
    if (text == "markdown" || text == "md")
        return ReportFormat::markdown;
    if (text == "csv")
        return ReportFormat::csv;
    if (text == "json")
        return ReportFormat::json;
    return std::nullopt;
}

const char* file_extension(ReportFormat format)
{
    switch (format) {
    case ReportFormat::markdown: return ".md";
    case ReportFormat::csv: return ".csv";
    case ReportFormat::json: return ".json";
    }
    return "";
}

std::string fixed4(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    return buf;
}

std::optional<AggregateScore> EvalReport::aggregate_for(const std::string& model_id, const std::string& label,
                                                        bool nonempty_gt_only) const
{
    auto m = scores.find(model_id);
    if (m == scores.end())
        return std::nullopt;
    auto l = m->second.find(label);
    if (l == m->second.end())
        return std::nullopt;
    const auto rows = nonempty_gt_only ? nonempty_gt(l->second) : l->second;
    if (rows.empty())
        return std::nullopt;
    return aggregate(rows, model_id);
}

std::string render_dsc_table(const EvalReport& report, ReportFormat format, bool nonempty_gt_only)
{
    struct Row {
        std::string label;
        std::size_t frames = 0;
        std::vector<std::optional<AggregateScore>> cells;
    };
    std::vector<Row> rows;
    for (const auto& label : report.labels) {
        Row row{label, 0, {}};
        for (const auto& model : report.model_ids) {
            row.cells.push_back(report.aggregate_for(model, label, nonempty_gt_only));
            if (row.cells.back())
                row.frames = std::max(row.frames, row.cells.back()->frame_count);
        }
        rows.push_back(std::move(row));
    }

    std::string out;
    switch (format) {
    case ReportFormat::markdown: {
        out = "| Object | Frames |";
        for (const auto& m : report.model_ids)
            out += " " + m + " |";
        out += "\n|---|---:|";
        for (std::size_t i = 0; i < report.model_ids.size(); ++i)
            out += "---:|";
        out += "\n";
        for (const auto& r : rows) {
            out += "| " + r.label + " | " + std::to_string(r.frames) + " |";
            for (const auto& c : r.cells)
                out += " " + (c ? fixed4(c->mean_dsc) : std::string("n/a")) + " |";
            out += "\n";
        }
        break;
    }
    case ReportFormat::csv: {
        out = "Object,Frames";
        for (const auto& m : report.model_ids)
            out += "," + m;
        out += "\n";
        for (const auto& r : rows) {
            out += r.label + "," + std::to_string(r.frames);
            for (const auto& c : r.cells)
                out += "," + (c ? fixed4(c->mean_dsc) : std::string());
            out += "\n";
        }
        break;
    }
    case ReportFormat::json: {
        nlohmann::json doc = nlohmann::json::object();
        doc["models"] = report.model_ids;
        doc["subset"] = nonempty_gt_only ? "nonempty_gt" : "all";
        nlohmann::json jrows = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json jr = {{"object", r.label}, {"frames", r.frames}};
            nlohmann::json dsc = nlohmann::json::object(), iou = nlohmann::json::object();
            for (std::size_t i = 0; i < r.cells.size(); ++i) {
                const auto& m = report.model_ids[i];
                dsc[m] = r.cells[i] ? nlohmann::json(r.cells[i]->mean_dsc) : nlohmann::json(nullptr);
                iou[m] = r.cells[i] ? nlohmann::json(r.cells[i]->mean_iou) : nlohmann::json(nullptr);
            }
            jr["mean_dsc"] = dsc;
            jr["mean_iou"] = iou;
            jrows.push_back(std::move(jr));
        }
        doc["rows"] = std::move(jrows);
        out = doc.dump(2) + "\n";
        break;
    }
    }
    return out;
}

std::string scores_to_csv(const std::vector<FrameScore>& scores)
{
    std::string out = "frame,label,dsc,iou,pred_area,gt_area\n";
    char buf[128];
    for (const auto& s : scores) {
        std::snprintf(buf, sizeof(buf), "%zu,", s.frame);
        out += buf;
        out += s.label;
        std::snprintf(buf, sizeof(buf), ",%.17g,%.17g,%zu,%zu\n", s.dsc, s.iou, s.pred_area, s.gt_area);
        out += buf;
    }
    return out;
}

std::string failures_to_csv(const std::vector<FailureFlag>& flags, const std::string& label)
{
    std::string out = "frame,label,reason,detail\n";
    char buf[64];
    for (const auto& f : flags) {
        out += std::to_string(f.frame) + "," + label + "," + to_string(f.reason);
        std::snprintf(buf, sizeof(buf), ",%.6g\n", f.detail);
        out += buf;
    }
    return out;
}

std::string format_histogram(const StatusHistogram& h)
{
    return "tracked: " + std::to_string(h.tracked) + "  held: " + std::to_string(h.held)
        + "  lost: " + std::to_string(h.lost);
}

} // namespace upk
