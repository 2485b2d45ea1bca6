#include "commands.hpp"

#include "upk/atomic_file.hpp"
#include "upk/error.hpp"
#include "upk/frame_filter.hpp"
#include "upk/parallel.hpp"
#include "upk/pose_tracker.hpp"
#include "upk/report.hpp"
#include "upk/seg_metrics.hpp"
#include "upk/sequence_io.hpp"
#include "upk/synth_bench.hpp"
#include "upk/trajectory_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unistd.h>

namespace upk::cli {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

std::set<std::string> split_set(const std::string& text)
{
    const auto v = split_list(text);
    return {v.begin(), v.end()};
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw BadSpec("expected START:END, got '" + text + "'");
    try {
        return {std::stoul(text.substr(0, colon)), std::stoul(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw BadSpec("expected START:END, got '" + text + "'");
    }
}

// Options shared by synth and bench.
struct SynthOptions {
    std::size_t frames = 120;
    double tilt = kDefaultTiltDegrees;
    std::uint64_t seed = 7;
    std::string shape = "spoonoid";
    std::string label = "spoon";
    std::string sequence_id = "synth";
    std::vector<std::string> occlude;
    std::vector<std::string> clip;
    double clip_fraction = 0.5;
    int dilate = 0;
    double depth_noise = 0.0;
    double dropout = 0.0;
    double depth_scale = 0.001;
    double background = 1.2;
    double density = 0.0;

    void add_to(CLI::App& app)
    {
        app.add_option("--frames", frames, "Number of frames")->check(CLI::PositiveNumber);
        app.add_option("--tilt", tilt, "Out-of-plane tilt amplitude of the script in degrees");
        app.add_option("--seed", seed, "Random seed");
        app.add_option("--shape", shape, "Object shape")->check(CLI::IsMember({"spoonoid", "box"}));
        app.add_option("--label", label, "Object label");
        app.add_option("--sequence-id", sequence_id, "Sequence id written to the manifest");
        app.add_option("--occlude", occlude, "Empty the mask on frames START:END (inclusive); repeatable");
        app.add_option("--clip", clip, "Clip the bottom of the mask on frames START:END; repeatable");
        app.add_option("--clip-fraction", clip_fraction, "Fraction of mask rows removed by --clip");
        app.add_option("--dilate", dilate, "Mask dilation in pixels (negative erodes)");
        app.add_option("--depth-noise", depth_noise, "Gaussian depth noise sigma in meters");
        app.add_option("--dropout", dropout, "Fraction of valid depth pixels zeroed");
        app.add_option("--depth-scale", depth_scale, "Meters per stored depth unit");
        app.add_option("--background", background, "Backdrop depth in meters (0 = none)");
        app.add_option("--density", density, "Surface samples per square meter (0 = shape default)");
    }

    ShapeSpec shape_spec() const
    {
        ShapeSpec s = shape == "box" ? ShapeSpec::box(0.06, 0.03, 0.015, 2.0e7) : ShapeSpec::spoon();
        if (density > 0.0)
            s.sample_density = density;
        return s;
    }

    CorruptionSpec corruption() const
    {
        CorruptionSpec c;
        for (const auto& r : occlude) {
            const auto [a, b] = parse_range(r);
            c.occlusion_windows.push_back({a, b, OcclusionKind::empty, 0.0});
        }
        for (const auto& r : clip) {
            const auto [a, b] = parse_range(r);
            c.occlusion_windows.push_back({a, b, OcclusionKind::clip, clip_fraction});
        }
        c.mask_dilation = dilate;
        c.depth_noise_sigma = depth_noise;
        c.depth_dropout = dropout;
        return c;
    }

    RenderOptions render() const { return {sequence_id, label, depth_scale, background}; }
};

struct TrackerOptions {
    std::string gap_policy = "hold";
    std::size_t min_points = 50;
    std::size_t stride = 2;
    std::size_t max_hold = 30;
    double flip_threshold = 2.618;
    bool permissive = false;

    void add_to(CLI::App& app)
    {
        app.add_option("--gap-policy", gap_policy, "Behavior on frames without a usable mask")
            ->check(CLI::IsMember({"hold", "lost"}));
        app.add_option("--min-points", min_points, "Minimum cloud size for a tracked frame");
        app.add_option("--stride", stride, "Backproject every n-th valid masked pixel");
        app.add_option("--max-hold", max_hold, "Frames a pose may be held before it is lost");
        app.add_option("--flip-threshold", flip_threshold, "Frame-to-frame rotation (radians) reported as a flip");
        app.add_flag("--permissive", permissive, "Break principal-axis ties instead of failing");
    }

    TrackerConfig config() const
    {
        TrackerConfig c;
        c.gap_policy = gap_policy == "lost" ? GapPolicy::lost : GapPolicy::hold;
        c.min_points = min_points;
        c.stride = stride;
        c.max_hold_frames = max_hold;
        c.flip_threshold = flip_threshold;
        c.tie_break = permissive ? EigenTieBreak::permissive : EigenTieBreak::strict;
        c.validate();
        return c;
    }
};

fs::path scratch_dir()
{
    static std::atomic<unsigned> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    return fs::temp_directory_path()
        / ("upk-bench-" + std::to_string(::getpid()) + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
}

class ScopedDir {
public:
    explicit ScopedDir(fs::path p, bool remove) : path_(std::move(p)), remove_(remove) {}
    ~ScopedDir()
    {
        if (remove_) {
            std::error_code ec;
            fs::remove_all(path_, ec);
        }
    }
    ScopedDir(const ScopedDir&) = delete;
    ScopedDir& operator=(const ScopedDir&) = delete;
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    bool remove_;
};

// ---------------------------------------------------------------- validate

int cmd_validate(const fs::path& manifest_path, double max_depth, std::ostream& out, std::ostream& err)
{
    const auto manifest = load_manifest(manifest_path);
    const auto issues = validate_sequence(manifest, {max_depth});
    for (const auto& i : issues)
        (i.severity == Severity::error ? err : out) << format_issue(i) << "\n";
    const auto n_err = std::count_if(issues.begin(), issues.end(),
                                     [](const Issue& i) { return i.severity == Severity::error; });
    out << manifest.sequence_id << ": " << manifest.frame_count << " frames, " << n_err << " error(s), "
        << issues.size() - n_err << " warning(s)\n";
    return n_err == 0 ? kExitOk : kExitUser;
}

// -------------------------------------------------------------- eval-masks

struct EvalMasksArgs {
    fs::path manifest;
    std::vector<std::string> pred_dirs;
    std::vector<std::string> model_ids;
    std::string gt_dir;
    std::vector<std::string> labels;
    fs::path out;
    std::string format = "markdown";
    double dsc_threshold = kDefaultDscThreshold;
    double area_jump_ratio = kDefaultAreaJumpRatio;
};

int cmd_eval_masks(const EvalMasksArgs& a, std::ostream& out, std::ostream& err)
{
    const auto format = parse_report_format(a.format);
    if (!format)
        throw SchemaError("unknown report format '" + a.format + "'");
    if (!a.model_ids.empty() && !a.pred_dirs.empty() && a.model_ids.size() != a.pred_dirs.size())
        throw SchemaError("--model-id must be given once per --pred directory");

    const auto m = load_manifest(a.manifest);
    std::vector<std::string> labels = a.labels.empty() ? m.object_labels : a.labels;
    for (const auto& l : labels)
        if (!m.has_label(l))
            throw SchemaError("label '" + l + "' is not declared in the manifest");

    // Model id -> where its masks come from (empty path = manifest masks).
    std::vector<std::pair<std::string, fs::path>> models;
    if (a.pred_dirs.empty()) {
        models.emplace_back(a.model_ids.empty() ? "manifest" : a.model_ids.front(), fs::path());
    } else {
        for (std::size_t i = 0; i < a.pred_dirs.size(); ++i) {
            const fs::path dir = a.pred_dirs[i];
            std::string id = a.model_ids.empty() ? dir.filename().string() : a.model_ids[i];
            if (id.empty())
                id = dir.parent_path().filename().string();
            models.emplace_back(id, dir);
        }
    }

    std::vector<Issue> issues;
    for (const auto& [id, dir] : models) {
        if (dir.empty())
            continue;
        auto v = validate_mask_directory(m, dir);
        issues.insert(issues.end(), v.begin(), v.end());
    }
    if (!a.gt_dir.empty()) {
        auto v = validate_mask_directory(m, a.gt_dir);
        issues.insert(issues.end(), v.begin(), v.end());
    }
    {
        auto v = validate_sequence(m);
        for (auto& i : v)
            if (i.severity == Severity::error)
                issues.push_back(std::move(i));
    }
    if (a.gt_dir.empty())
        for (const auto& f : m.frames)
            for (const auto& l : labels)
                if (!f.gt.count(l))
                    issues.push_back({f.index, Severity::error, "no ground-truth mask for label '" + l + "'"});
    if (has_errors(issues)) {
        for (const auto& i : issues)
            if (i.severity == Severity::error)
                err << i.frame << ": " << i.message << "\n";
        return kExitUser;
    }

    const int w = m.intrinsics.width, h = m.intrinsics.height;
    EvalReport report;
    report.labels = labels;
    for (const auto& [id, dir] : models) {
        if (report.scores.count(id))
            throw SchemaError("duplicate model id '" + id + "'");
        report.model_ids.push_back(id);
        auto& per_label = report.scores[id];
        std::string csv;
        std::string failures;
        for (const auto& label : labels) {
            std::vector<FrameScore> scores(m.frame_count);
            parallel_for(m.frame_count, [&](std::size_t f) {
                const auto& fr = m.frames[f];
                const fs::path pred_path = dir.empty() ? fr.masks.at(label) : layout::prediction(dir, label, f);
                const fs::path gt_path = a.gt_dir.empty() ? fr.gt.at(label) : layout::prediction(a.gt_dir, label, f);
                scores[f] = score_frame(f, label, load_mask(pred_path, w, h), load_mask(gt_path, w, h));
            });
            const auto flags = mine_failures(scores, a.dsc_threshold, a.area_jump_ratio);
            const auto body = scores_to_csv(scores);
            csv += csv.empty() ? body : body.substr(body.find('\n') + 1);
            const auto fbody = failures_to_csv(flags, label);
            failures += failures.empty() ? fbody : fbody.substr(fbody.find('\n') + 1);
            per_label[label] = std::move(scores);
        }
        write_file_atomic(a.out / ("scores_" + id + ".csv"), csv);
        write_file_atomic(a.out / ("failures_" + id + ".csv"), failures);
    }

    const auto table = render_dsc_table(report, *format, false);
    const auto table_nonempty = render_dsc_table(report, *format, true);
    write_file_atomic(a.out / (std::string("table") + file_extension(*format)), table);
    write_file_atomic(a.out / (std::string("table_nonempty_gt") + file_extension(*format)), table_nonempty);
    out << "Mean Dice similarity (all frames)\n" << table;
    out << "\nMean Dice similarity (frames with nonempty ground truth)\n" << table_nonempty;
    return kExitOk;
}

// ------------------------------------------------------------------ filter

struct FilterArgs {
    fs::path labels_file;
    std::optional<std::string> require_all;
    std::optional<std::string> require_any;
    std::optional<std::size_t> hysteresis;
    std::string vocab;
    fs::path manifest;
    fs::path out;
};

int cmd_filter(const FilterArgs& a, std::ostream& out)
{
    FilterRule rule = default_eating_rule();
    if (a.require_all)
        rule.required_all = split_set(*a.require_all);
    if (a.require_any)
        rule.required_any = split_set(*a.require_any);
    if (a.hysteresis)
        rule.hysteresis = *a.hysteresis;
    const std::set<std::string> vocab = a.vocab.empty() ? default_vocabulary() : split_set(a.vocab);

    const auto frames = load_frame_labels(a.labels_file);
    const auto kept = filter_frames(frames, rule, vocab);

    std::optional<SequenceManifest> rewritten;
    if (!a.manifest.empty()) {
        const auto m = load_manifest(a.manifest);
        SequenceManifest r = m;
        r.frames.clear();
        for (std::size_t idx : kept) {
            if (idx >= m.frame_count)
                throw ConsistencyError("kept frame " + std::to_string(idx) + " is not in the manifest");
            FrameEntry e = m.frames[idx];
            const std::size_t source = e.source_index.value_or(e.index);
            e.index = r.frames.size();
            e.source_index = source == e.index && !m.frames[idx].source_index ? std::nullopt
                                                                               : std::optional<std::size_t>(source);
            r.frames.push_back(std::move(e));
        }
        r.frame_count = r.frames.size();
        rewritten = std::move(r);
    }

    write_file_atomic(a.out / "kept.json", nlohmann::json(kept).dump() + "\n");
    if (rewritten)
        save_manifest(*rewritten, layout::manifest(a.out));
    out << "kept " << kept.size() << " of " << frames.size() << " frames\n";
    return kExitOk;
}

// ------------------------------------------------------------------- track

struct TrackArgs {
    fs::path manifest;
    std::string label;
    fs::path out;
    bool use_gt = false;
    TrackerOptions tracker;
};

int cmd_track(const TrackArgs& a, std::ostream& out)
{
    const auto m = load_manifest(a.manifest);
    const std::string label = a.label.empty() ? (m.object_labels.empty() ? "" : m.object_labels.front()) : a.label;
    const auto cfg = a.tracker.config();
    const auto traj = track_sequence(m, label, cfg, a.use_gt ? MaskSource::ground_truth : MaskSource::predicted);
    const auto flips = detect_flips(traj, cfg.flip_threshold);

    save_trajectory(a.out / ("trajectory_" + label + ".jsonl"), traj);
    write_file_atomic(a.out / ("trajectory_" + label + ".csv"), trajectory_to_csv(traj));
    write_file_atomic(a.out / ("flips_" + label + ".json"), nlohmann::json(flips).dump() + "\n");

    out << m.sequence_id << " / " << label << ": " << format_histogram(histogram(traj)) << "\n";
    out << "flips: " << nlohmann::json(flips).dump() << "\n";
    return kExitOk;
}

// ------------------------------------------------------------------- synth

int cmd_synth(const SynthOptions& s, const fs::path& dir, std::ostream& out)
{
    const auto cloud = make_object_cloud(s.shape_spec(), s.seed);
    const auto script = eating_script(s.frames, s.tilt);
    const auto m = render_sequence(cloud, script, CameraIntrinsics{}, s.corruption(), s.seed, dir, s.render());
    out << "wrote " << m.frame_count << " frames of '" << s.label << "' (" << cloud.size() << " surface samples) to "
        << dir.string() << "\n";
    return kExitOk;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
    SynthOptions synth;
    TrackerOptions tracker;
    fs::path out;
    bool json = false;
    std::string sweep;
};

nlohmann::json stats_json(const BenchResult& r)
{
    return {
        {"frames", r.manifest.frame_count},
        {"translation_rmse_m", r.stats.translation_rmse},
        {"rotation_mean_rad", r.stats.rotation_mean},
        {"rotation_max_rad", r.stats.rotation_max},
        {"rotation_mean_deg", r.stats.rotation_mean * kRadToDeg},
        {"rotation_max_deg", r.stats.rotation_max * kRadToDeg},
        {"frames_compared", r.stats.frames_compared},
        {"status", {{"tracked", r.statuses.tracked}, {"held", r.statuses.held}, {"lost", r.statuses.lost}}},
        {"flips", r.flips},
        {"mean_dsc", r.mean_dsc},
    };
}

BenchResult bench_once(const BenchArgs& a, const SynthOptions& s, const fs::path& dir)
{
    BenchConfig cfg;
    cfg.shape = s.shape_spec();
    cfg.frame_count = s.frames;
    cfg.tilt_degrees = s.tilt;
    cfg.seed = s.seed;
    cfg.corruption = s.corruption();
    cfg.tracker = a.tracker.config();
    cfg.render = s.render();
    cfg.workdir = dir;
    return run_bench(cfg);
}

int cmd_bench(const BenchArgs& a, std::ostream& out)
{
    const bool keep = !a.out.empty();
    ScopedDir root(keep ? a.out : scratch_dir(), !keep);

    if (!a.sweep.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        std::string table = "| Dilation | Mean DSC | Translation RMSE (mm) | Mean rotation (deg) |\n|---:|---:|---:|---:|\n";
        for (const auto& item : split_list(a.sweep)) {
            SynthOptions s = a.synth;
            s.dilate = std::stoi(item);
            const auto r = bench_once(a, s, root.path() / ("dilate_" + item));
            auto j = stats_json(r);
            j["dilation"] = s.dilate;
            rows.push_back(j);
            table += "| " + std::to_string(s.dilate) + " | " + fixed4(r.mean_dsc) + " | "
                + fixed4(r.stats.translation_rmse * 1e3) + " | " + fixed4(r.stats.rotation_mean * kRadToDeg) + " |\n";
        }
        if (a.json)
            out << rows.dump(2) << "\n";
        else
            out << table;
        return kExitOk;
    }

    const auto r = bench_once(a, a.synth, root.path());
    if (a.json) {
        out << stats_json(r).dump(2) << "\n";
        return kExitOk;
    }
    out << "frames:              " << r.manifest.frame_count << "\n"
        << "status:              " << format_histogram(r.statuses) << "\n"
        << "mean DSC:            " << fixed4(r.mean_dsc) << "\n"
        << "translation RMSE:    " << fixed4(r.stats.translation_rmse * 1e3) << " mm\n"
        << "rotation mean / max: " << fixed4(r.stats.rotation_mean * kRadToDeg) << " / "
        << fixed4(r.stats.rotation_max * kRadToDeg) << " deg\n"
        << "frames compared:     " << r.stats.frames_compared << "\n"
        << "flips:               " << nlohmann::json(r.flips).dump() << "\n";
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Segmentation scoring, frame filtering and 6-DoF pose tracking for eating videos", "upk"};
    app.require_subcommand(1);

    fs::path manifest_path;
    double max_depth = kDefaultMaxDepth;
    auto* validate = app.add_subcommand("validate", "Check every file a manifest references");
    validate->add_option("--manifest", manifest_path, "Sequence manifest")->required();
    validate->add_option("--max-depth", max_depth, "Depths at or beyond this (meters) are reported");

    EvalMasksArgs eval;
    auto* eval_cmd = app.add_subcommand("eval-masks", "Score predicted masks against ground truth");
    eval_cmd->add_option("--manifest", eval.manifest, "Sequence manifest")->required();
    eval_cmd->add_option("--pred", eval.pred_dirs, "Prediction directory <dir>/<label>/<frame>.png; repeatable");
    eval_cmd->add_option("--model-id", eval.model_ids, "Column name for each --pred, in order");
    eval_cmd->add_option("--gt", eval.gt_dir, "Ground-truth directory (default: manifest gt entries)");
    eval_cmd->add_option("--label", eval.labels, "Labels to score (default: all)");
    eval_cmd->add_option("--out", eval.out, "Output directory")->required();
    eval_cmd->add_option("--format", eval.format, "markdown, csv or json");
    eval_cmd->add_option("--dsc-threshold", eval.dsc_threshold, "Frames below this DSC are flagged");
    eval_cmd->add_option("--area-jump-ratio", eval.area_jump_ratio, "Frame-to-frame area ratio flagged as a jump");

    FilterArgs filter;
    auto* filter_cmd = app.add_subcommand("filter", "Keep frames whose detections match an eating rule");
    filter_cmd->add_option("--labels", filter.labels_file, "JSON lines of {frame, labels}")->required();
    filter_cmd->add_option("--require-all", filter.require_all, "Comma-separated labels that must all appear");
    filter_cmd->add_option("--require-any", filter.require_any, "Comma-separated labels of which one must appear");
    filter_cmd->add_option("--hysteresis", filter.hysteresis, "Fill failing gaps up to this many frames");
    filter_cmd->add_option("--vocab", filter.vocab, "Comma-separated label vocabulary");
    filter_cmd->add_option("--manifest", filter.manifest, "Manifest to rewrite with only the kept frames");
    filter_cmd->add_option("--out", filter.out, "Output directory")->required();

    TrackArgs track;
    auto* track_cmd = app.add_subcommand("track", "Estimate a 6-DoF pose per frame");
    track_cmd->add_option("--manifest", track.manifest, "Sequence manifest")->required();
    track_cmd->add_option("--label", track.label, "Object label (default: first in manifest)");
    track_cmd->add_option("--out", track.out, "Output directory")->required();
    track_cmd->add_flag("--use-gt", track.use_gt, "Track ground-truth masks instead of predictions");
    track.tracker.add_to(*track_cmd);

    SynthOptions synth;
    fs::path synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic sequence with known poses");
    synth_cmd->add_option("--out", synth_out, "Sequence directory")->required();
    synth.add_to(*synth_cmd);

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Render, track and score against the known trajectory");
    bench.synth.add_to(*bench_cmd);
    bench.tracker.add_to(*bench_cmd);
    bench_cmd->add_option("--out", bench.out, "Keep the rendered sequence here");
    bench_cmd->add_flag("--json", bench.json, "Machine-readable output");
    bench_cmd->add_option("--sweep-dilation", bench.sweep, "Comma-separated dilation levels to compare");

    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUser;
    }

    try {
        if (*validate)
            return cmd_validate(manifest_path, max_depth, out, err);
        if (*eval_cmd)
            return cmd_eval_masks(eval, out, err);
        if (*filter_cmd)
            return cmd_filter(filter, out);
        if (*track_cmd)
            return cmd_track(track, out);
        if (*synth_cmd)
            return cmd_synth(synth, synth_out, out);
        if (*bench_cmd)
            return cmd_bench(bench, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUser;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}

} // namespace upk::cli
