// Command-line front end: scene generation, detection runs, evaluation,
// branch calibration, and energy accounting. Every file-producing command
// writes outputs atomically (temp file + rename) and drops a manifest with
// input digests next to its primary output.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "evspike/config.hpp"
#include "evspike/energy.hpp"
#include "evspike/errors.hpp"
#include "evspike/events.hpp"
#include "evspike/io.hpp"
#include "evspike/pipeline.hpp"
#include "evspike/synthetic.hpp"

#ifndef EVSPIKE_TOOL_VERSION
#define EVSPIKE_TOOL_VERSION "0.0.0"
#endif

namespace {

namespace fs = std::filesystem;
using evspike::ConfigError;
using evspike::DataError;
using evspike::IoError;
using ojson = nlohmann::ordered_json;

// --- hashing -----------------------------------------------------------------

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
            throw IoError("cannot initialize SHA-256");
        }
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const char* data, std::size_t len) {
        if (EVP_DigestUpdate(ctx_, data, len) != 1) throw IoError("SHA-256 update failed");
    }
    std::string hex() {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_, digest, &len) != 1) throw IoError("SHA-256 final failed");
        static const char* kHex = "0123456789abcdef";
        std::string out;
        out.reserve(2 * len);
        for (unsigned int i = 0; i < len; ++i) {
            out.push_back(kHex[digest[i] >> 4]);
            out.push_back(kHex[digest[i] & 0xf]);
        }
        return out;
    }

private:
    EVP_MD_CTX* ctx_;
};

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) throw IoError("cannot open " + path);
    Sha256 h;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h.update(buf, static_cast<std::size_t>(in.gcount()));
        if (in.eof()) break;
    }
    if (in.bad()) throw IoError("read failure on " + path);
    return h.hex();
}

// --- atomic output files -------------------------------------------------------

// Writes to <path>.tmp and renames onto <path> on commit, so readers never see
// a half-written file and a crashed run leaves the previous output intact.
class AtomicFile {
public:
    explicit AtomicFile(const std::string& path)
        : path_(path), tmp_(path + ".tmp"), out_(tmp_, std::ios::binary) {
        if (!out_.is_open()) throw IoError("cannot create " + tmp_);
    }
    ~AtomicFile() {
        if (!committed_) {
            out_.close();
            std::error_code ec;
            fs::remove(tmp_, ec);
        }
    }

    std::ostream& stream() { return out_; }

    void commit() {
        out_.flush();
        if (!out_) throw IoError("write failure on " + tmp_);
        out_.close();
        std::error_code ec;
        fs::rename(tmp_, path_, ec);
        if (ec) throw IoError("cannot rename " + tmp_ + " to " + path_ + ": " + ec.message());
        committed_ = true;
    }

private:
    std::string path_;
    std::string tmp_;
    std::ofstream out_;
    bool committed_ = false;
};

// --- run manifests ---------------------------------------------------------------

class ManifestWriter {
public:
    explicit ManifestWriter(std::string command)
        : command_(std::move(command)), started_(std::chrono::steady_clock::now()) {}

    void set_config(const std::string& path) { config_ = {path, sha256_file(path)}; }
    void add_input(const std::string& path) { inputs_.emplace_back(path, sha256_file(path)); }
    void add_output(const std::string& path) { outputs_.push_back(path); }

    void write(const std::string& manifest_path) const {
        ojson j;
        j["tool"] = "evspike";
        j["version"] = EVSPIKE_TOOL_VERSION;
        j["command"] = command_;
        if (config_) {
            j["config"] = config_->first;
            j["config_sha256"] = config_->second;
        }
        ojson inputs = ojson::object();
        for (const auto& [path, digest] : inputs_) inputs[path] = digest;
        j["input_sha256"] = std::move(inputs);
        j["outputs"] = outputs_;
        const auto elapsed = std::chrono::steady_clock::now() - started_;
        j["duration_seconds"] =
            std::chrono::duration_cast<std::chrono::duration<double>>(elapsed).count();
        AtomicFile f(manifest_path);
        f.stream() << j.dump(2) << '\n';
        f.commit();
    }

private:
    std::string command_;
    std::optional<std::pair<std::string, std::string>> config_;
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point started_;
};

// --- small helpers -----------------------------------------------------------------

evspike::SensorGeometry parse_geometry(const std::string& text) {
    const std::size_t x = text.find('x');
    if (x == std::string::npos || x == 0 || x + 1 >= text.size()) {
        throw ConfigError("geometry must be WIDTHxHEIGHT, got '" + text + "'");
    }
    evspike::SensorGeometry g;
    try {
        g.width = std::stoi(text.substr(0, x));
        g.height = std::stoi(text.substr(x + 1));
    } catch (const std::exception&) {
        throw ConfigError("geometry must be WIDTHxHEIGHT, got '" + text + "'");
    }
    g.validate();
    return g;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

// Grayscale frame with detection boxes drawn as bright one-pixel outlines.
void write_overlay_pgm(const std::string& path, const evspike::SensorGeometry& g,
                       const evspike::DetectionRecord& rec) {
    std::vector<unsigned char> px(static_cast<std::size_t>(g.pixel_count()), 0);
    auto set = [&](std::int32_t x, std::int32_t y, unsigned char v) {
        if (g.contains(x, y)) {
            px[static_cast<std::size_t>(y) * static_cast<std::size_t>(g.width) +
               static_cast<std::size_t>(x)] = v;
        }
    };
    for (const evspike::DetectionBox& db : rec.boxes) {
        const unsigned char shade = db.band < 0 ? 128 : 255;
        for (std::int32_t x = db.box.x_min; x <= db.box.x_max; ++x) {
            set(x, db.box.y_min, shade);
            set(x, db.box.y_max, shade);
        }
        for (std::int32_t y = db.box.y_min; y <= db.box.y_max; ++y) {
            set(db.box.x_min, y, shade);
            set(db.box.x_max, y, shade);
        }
    }
    AtomicFile f(path);
    f.stream() << "P5\n" << g.width << ' ' << g.height << "\n255\n";
    f.stream().write(reinterpret_cast<const char*>(px.data()),
                     static_cast<std::streamsize>(px.size()));
    f.commit();
}

// --- subcommands -----------------------------------------------------------------------

struct GenArgs {
    std::string scene_path;
    std::string out_dir;
};

int cmd_gen(const GenArgs& a) {
    ManifestWriter manifest("gen");
    manifest.set_config(a.scene_path);
    const evspike::SceneSpec spec = evspike::load_scene_config_file(a.scene_path);
    const evspike::GeneratedScene scene = evspike::generate(spec);
    ensure_dir(a.out_dir);

    const std::string events_path = a.out_dir + "/events.csv";
    const std::string labels_path = a.out_dir + "/labels.csv";
    const std::string gt_path = a.out_dir + "/gt.jsonl";
    {
        AtomicFile f(events_path);
        evspike::write_events_csv(evspike::strip_labels(scene.events), f.stream());
        f.commit();
    }
    {
        AtomicFile f(labels_path);
        evspike::write_labels_csv(scene.events, f.stream());
        f.commit();
    }
    {
        AtomicFile f(gt_path);
        evspike::write_ground_truth(scene.ground_truth, f.stream());
        f.commit();
    }
    manifest.add_output(events_path);
    manifest.add_output(labels_path);
    manifest.add_output(gt_path);
    manifest.write(a.out_dir + "/manifest.json");
    std::cout << scene.events.size() << " events, " << scene.ground_truth.size()
              << " ground-truth frames -> " << a.out_dir << '\n';
    return 0;
}

struct RunArgs {
    std::string config_path;
    std::string events_path;
    std::string out_path;
    std::string overlay_dir;
};

int cmd_run(const RunArgs& a) {
    ManifestWriter manifest("run");
    manifest.set_config(a.config_path);
    manifest.add_input(a.events_path);
    const evspike::PipelineConfig config = evspike::load_pipeline_config_file(a.config_path);
    for (const std::string& warning : config.regime_warnings()) {
        std::cerr << "warning: " << warning << '\n';
    }
    if (!a.overlay_dir.empty()) ensure_dir(a.overlay_dir);

    std::ifstream in(a.events_path);
    if (!in.is_open()) throw IoError("cannot open " + a.events_path);
    evspike::EventCsvReader reader(in);

    AtomicFile out(a.out_path);
    std::size_t n_records = 0;
    std::size_t n_events = 0;
    const evspike::RecordSink sink = [&](const evspike::DetectionRecord& rec) {
        evspike::write_detections(std::span<const evspike::DetectionRecord>(&rec, 1),
                                  out.stream());
        if (!a.overlay_dir.empty()) {
            std::ostringstream name;
            name << a.overlay_dir << "/frame_" << rec.t_us << ".pgm";
            write_overlay_pgm(name.str(), config.geometry, rec);
        }
        ++n_records;
    };
    evspike::StreamingDetector detector(config, sink);
    while (auto e = reader.next()) {
        detector.feed(*e);
        ++n_events;
    }
    detector.finish();
    out.commit();

    manifest.add_output(a.out_path);
    if (!a.overlay_dir.empty()) manifest.add_output(a.overlay_dir);
    manifest.write(a.out_path + ".manifest.json");
    std::cout << n_events << " events -> " << n_records << " records -> " << a.out_path << '\n';
    return 0;
}

struct EvalArgs {
    std::string pred_path;
    std::string gt_path;
    std::string out_path;
    bool strict_paper_fp = false;
};

int cmd_eval(const EvalArgs& a) {
    ManifestWriter manifest("eval");
    manifest.add_input(a.pred_path);
    manifest.add_input(a.gt_path);
    const auto detections = evspike::read_detections_file(a.pred_path);
    const auto ground_truth = evspike::read_ground_truth_file(a.gt_path);
    evspike::EvalOptions options;
    options.strict_paper_fp = a.strict_paper_fp;
    const evspike::Metrics metrics = evspike::evaluate(detections, ground_truth, options);

    if (a.out_path.empty()) {
        evspike::write_metrics(metrics, std::cout);
    } else {
        AtomicFile f(a.out_path);
        evspike::write_metrics(metrics, f.stream());
        f.commit();
        manifest.add_output(a.out_path);
        manifest.write(a.out_path + ".manifest.json");
        std::cout << "precision " << metrics.precision << ", recall " << metrics.recall
                  << ", mean IoU " << metrics.mean_iou << " -> " << a.out_path << '\n';
    }
    return 0;
}

struct CalibrateArgs {
    double speed = 0.0;
    std::int64_t dt_us = 1000;
    std::string geometry = "346x260";
    double u_thr = 1.0;
    std::string out_path;
};

int cmd_calibrate(const CalibrateArgs& a) {
    ManifestWriter manifest("calibrate");
    const evspike::SensorGeometry g = parse_geometry(a.geometry);
    const evspike::TimeBase tb{0, a.dt_us};
    const evspike::CalibrationResult r = evspike::calibrate_branch(a.speed, tb, g, a.u_thr);

    std::ostringstream fragment;
    fragment.precision(17);
    fragment << "# calibrated for " << a.speed << " px/s at dt_us = " << a.dt_us << " on "
             << g.width << "x" << g.height << "\n"
             << "# accepted beta range [" << r.beta_lo << ", " << r.beta_hi << "]\n"
             << "# spike fraction " << r.fast_fraction << " at target speed, "
             << r.slow_fraction << " at half speed\n"
             << "[branch]\n"
             << "threshold_speed = " << a.speed << "\n"
             << "beta = " << r.params.beta << "\n"
             << "u_thr = " << r.params.u_thr << "\n";
    if (a.out_path.empty()) {
        std::cout << fragment.str();
    } else {
        AtomicFile f(a.out_path);
        f.stream() << fragment.str();
        f.commit();
        manifest.add_output(a.out_path);
        manifest.write(a.out_path + ".manifest.json");
        std::cout << "beta " << r.params.beta << " -> " << a.out_path << '\n';
    }
    return 0;
}

struct EnergyArgs {
    bool paper = false;
    std::string events_path;
    std::string geometry = "346x260";
    std::int64_t dt_us = 1000;
    std::string out_path;
};

int cmd_energy(const EnergyArgs& a) {
    ManifestWriter manifest("energy");
    ojson j;
    if (a.paper) {
        const evspike::ReferenceWorkload w;
        const double snn = evspike::snn_energy(w.m_neurons, w.c_synapses, w.f_rate);
        const double mac = evspike::mac_energy(w.detector_macs);
        j["m_neurons"] = w.m_neurons;
        j["c_synapses"] = w.c_synapses;
        j["f_rate"] = w.f_rate;
        j["snn_energy_j"] = snn;
        j["snn_energy_nj"] = snn * 1e9;
        j["detector_macs"] = w.detector_macs;
        j["mac_energy_j"] = mac;
        j["mac_energy_mj"] = mac * 1e3;
        j["mac_over_snn"] = mac / snn;
    } else {
        manifest.add_input(a.events_path);
        const evspike::SensorGeometry g = parse_geometry(a.geometry);
        const evspike::TimeBase tb{0, a.dt_us};
        const evspike::EventStream stream = evspike::read_events_csv_file(a.events_path);
        const evspike::OpsReport r = evspike::measure_input_rate(stream, g, tb);
        j["m_neurons"] = r.m_neurons;
        j["c_synapses"] = r.c_synapses;
        j["f_rate"] = r.f_rate;
        j["steps"] = r.steps;
        j["snn_energy_j"] = r.snn_energy_j;
        j["snn_energy_nj"] = r.snn_energy_j * 1e9;
    }
    if (a.out_path.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        AtomicFile f(a.out_path);
        f.stream() << j.dump(2) << '\n';
        f.commit();
        manifest.add_output(a.out_path);
        manifest.write(a.out_path + ".manifest.json");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-camera speed filtering and detection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("evspike ") + EVSPIKE_TOOL_VERSION);

    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic labeled scene");
    gen->add_option("--scene", gen_args.scene_path, "Scene description INI")->required();
    gen->add_option("--out-dir", gen_args.out_dir, "Output directory")->required();

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "Run detection over an event stream");
    run->add_option("--config", run_args.config_path, "Pipeline configuration INI")->required();
    run->add_option("--events", run_args.events_path, "Input events CSV")->required();
    run->add_option("--out", run_args.out_path, "Output detections JSONL")->required();
    run->add_option("--overlay", run_args.overlay_dir,
                    "Directory for per-record PGM overlay frames");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Score detections against ground truth");
    eval->add_option("--pred", eval_args.pred_path, "Detections JSONL")->required();
    eval->add_option("--gt", eval_args.gt_path, "Ground-truth JSONL")->required();
    eval->add_option("--out", eval_args.out_path, "Metrics JSON (stdout when omitted)");
    eval->add_flag("--strict-paper-fp", eval_args.strict_paper_fp,
                   "Count false positives only at frames with no ground truth");

    CalibrateArgs cal_args;
    CLI::App* cal = app.add_subcommand("calibrate", "Tune a branch leak factor for a speed");
    cal->add_option("--speed", cal_args.speed, "Target speed in px/s")->required();
    cal->add_option("--dt-us", cal_args.dt_us, "Filter step in microseconds");
    cal->add_option("--geometry", cal_args.geometry, "Sensor size WIDTHxHEIGHT");
    cal->add_option("--u-thr", cal_args.u_thr, "Spike threshold");
    cal->add_option("--out", cal_args.out_path, "Write the [branch] fragment here");

    EnergyArgs energy_args;
    CLI::App* energy = app.add_subcommand("energy", "Report spiking-layer energy cost");
    energy->add_flag("--paper", energy_args.paper,
                     "Reproduce the published reference workload numbers");
    energy->add_option("--events", energy_args.events_path, "Events CSV to measure");
    energy->add_option("--geometry", energy_args.geometry, "Sensor size WIDTHxHEIGHT");
    energy->add_option("--dt-us", energy_args.dt_us, "Filter step in microseconds");
    energy->add_option("--out", energy_args.out_path, "Write the JSON report here");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_gen(gen_args);
        if (run->parsed()) return cmd_run(run_args);
        if (eval->parsed()) return cmd_eval(eval_args);
        if (cal->parsed()) return cmd_calibrate(cal_args);
        if (energy->parsed()) {
            if (energy_args.paper == !energy_args.events_path.empty()) {
                // Exactly one of --paper / --events must be given.
                if (!energy_args.paper) {
                    throw ConfigError("energy needs either --paper or --events");
                }
                throw ConfigError("--paper and --events are mutually exclusive");
            }
            return cmd_energy(energy_args);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad flags are configuration errors
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
