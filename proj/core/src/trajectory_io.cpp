#include "upk/trajectory_io.hpp"

#include "upk/atomic_file.hpp"
#include "upk/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace upk {

using nlohmann::json;

std::string trajectory_to_jsonl(const PoseTrajectory& trajectory)
{
    std::string out;
    for (const auto& e : trajectory.entries) {
        json rec = json::object();
        rec["frame"] = e.frame;
        rec["status"] = to_string(e.pose.status);
        rec["confidence"] = e.pose.confidence;
        json rot = json::array();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                rot.push_back(e.pose.rotation(r, c));
        rec["rotation"] = std::move(rot);
        rec["translation"] = {e.pose.translation.x(), e.pose.translation.y(), e.pose.translation.z()};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

PoseTrajectory parse_trajectory_jsonl(std::string_view text, const std::string& sequence_id, const std::string& label)
{
    PoseTrajectory traj{sequence_id, label, {}};
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const std::string where = "trajectory line " + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(where + ": " + e.what());
        }
        for (const char* key : {"frame", "status", "confidence", "rotation", "translation"})
            if (!j.contains(key))
                throw SchemaError(where + ": missing required field '" + key + "'");
        for (const auto& [key, v] : j.items())
            if (key != "frame" && key != "status" && key != "confidence" && key != "rotation" && key != "translation")
                throw SchemaError(where + ": unknown field '" + key + "'");
        const auto& rot = j["rotation"];
        const auto& tr = j["translation"];
        if (!j["frame"].is_number_unsigned() || !j["status"].is_string() || !j["confidence"].is_number()
            || !rot.is_array() || rot.size() != 9 || !tr.is_array() || tr.size() != 3)
            throw SchemaError(where + ": malformed record");

        TrajectoryEntry e;
        e.frame = j["frame"].get<std::size_t>();
        const auto status = parse_track_status(j["status"].get<std::string>());
        if (!status)
            throw SchemaError(where + ": unknown status '" + j["status"].get<std::string>() + "'");
        e.pose.status = *status;
        e.pose.confidence = j["confidence"].get<double>();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                e.pose.rotation(r, c) = rot[r * 3 + c].get<double>();
        for (int i = 0; i < 3; ++i)
            e.pose.translation(i) = tr[i].get<double>();
        if (!traj.entries.empty() && e.frame <= traj.entries.back().frame)
            throw ConsistencyError(where + ": frame indices must be strictly increasing");
        traj.entries.push_back(e);
    }
    return traj;
}

PoseTrajectory load_trajectory(const std::filesystem::path& path, const std::string& sequence_id,
                               const std::string& label)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open trajectory " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_trajectory_jsonl(ss.str(), sequence_id, label);
}

void save_trajectory(const std::filesystem::path& path, const PoseTrajectory& trajectory)
{
    write_file_atomic(path, trajectory_to_jsonl(trajectory));
}

std::string trajectory_to_csv(const PoseTrajectory& trajectory)
{
    std::string out = "frame,status,confidence,r00,r01,r02,r10,r11,r12,r20,r21,r22,tx,ty,tz,yaw_deg,pitch_deg,roll_deg\n";
    char buf[64];
    auto num = [&](double v) {
        if (v == 0.0)
            v = 0.0; // no "-0"
        std::snprintf(buf, sizeof(buf), ",%.9g", v);
        out += buf;
    };
    for (const auto& e : trajectory.entries) {
        out += std::to_string(e.frame);
        out += ',';
        out += to_string(e.pose.status);
        num(e.pose.confidence);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                num(e.pose.rotation(r, c));
        for (int i = 0; i < 3; ++i)
            num(e.pose.translation(i));
        const auto ypr = euler_zyx(e.pose.rotation) * (180.0 / std::numbers::pi);
        for (int i = 0; i < 3; ++i)
            num(ypr(i));
        out += '\n';
    }
    return out;
}

} // namespace upk
