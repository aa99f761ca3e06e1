#include <CLI11.hpp>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <thread>
#include <vector>

#include "rtcbf/scenarios.hpp"
#include "rtcbf/sim.hpp"

namespace {

using nlohmann::json;

int log_level() {
    const char* env = std::getenv("RTCBF_LOG_LEVEL");
    if (!env) return 1;  // warn
    const std::string v = env;
    if (v == "error") return 0;
    if (v == "warn") return 1;
    if (v == "info") return 2;
    if (v == "debug") return 3;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[info] " << msg << "\n";
}

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config: " + path);
    json j;
    in >> j;
    return j;
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
}

struct SweepPoint {
    double value = 0.0;
    rtcbf::SimLog fixed;
    rtcbf::SimLog rt;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rate-tunable CBF scenario runner"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", axis = "x0", range;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    long long seed = 0;
    bool seed_set = false;

    CLI::App* cmd_run = app.add_subcommand("run", "run one scenario");
    cmd_run->add_option("config", config_path, "scenario config (json)")
        ->required();
    cmd_run->add_option("--out", out_dir, "output directory");
    cmd_run->add_option("--seed", seed, "seed override")
        ->each([&](const std::string&) { seed_set = true; });

    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "sweep an axis, fixed vs adaptive");
    cmd_sweep->add_option("config", config_path, "scenario config (json)")
        ->required();
    cmd_sweep->add_option("--axis", axis, "swept parameter (x0)");
    cmd_sweep->add_option("--range", range, "a:b:step")->required();
    cmd_sweep->add_option("--jobs", jobs, "parallel workers");
    cmd_sweep->add_option("--out", out_dir, "output directory");

    CLI::App* cmd_validate =
        app.add_subcommand("validate", "check a config and exit");
    cmd_validate->add_option("config", config_path, "scenario config (json)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        json config = load_config(config_path);
        rtcbf::validate_config(config);

        if (cmd_validate->parsed()) return 0;

        std::filesystem::create_directories(out_dir);

        if (cmd_run->parsed()) {
            if (seed_set) config["seed"] = seed;
            log_info("running scenario " +
                     config.at("scenario").get<std::string>());
            const rtcbf::SimLog log = rtcbf::run_scenario(config);
            rtcbf::write_csv(log, out_dir + "/log.csv");
            write_text(out_dir + "/summary.json", rtcbf::summary_json(log));
            return log.status == rtcbf::RunStatus::Completed ? 0 : 1;
        }

        // sweep
        if (axis != "x0") {
            std::cerr << "unsupported sweep axis: " << axis << "\n";
            return 2;
        }
        double a = 0, b = 0, step = 0;
        if (std::sscanf(range.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 ||
            step <= 0) {
            std::cerr << "bad --range, expected a:b:step with step > 0\n";
            return 2;
        }
        const int count = static_cast<int>(std::floor((b - a) / step + 1e-9)) + 1;
        std::vector<SweepPoint> points(count);
        if (jobs < 1) jobs = 1;
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                json local = config;
                local["corridor"]["x0"] = a + i * step;
                points[i].value = a + i * step;
                local["adaptation"] = false;
                points[i].fixed = rtcbf::run_scenario(local);
                local["adaptation"] = true;
                points[i].rt = rtcbf::run_scenario(local);
            }
        };
        std::vector<std::thread> pool;
        for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();

        std::string csv = "x0,t_fail_fixed,status_fixed,t_fail_rt,status_rt\n";
        for (int i = 0; i < count; ++i) {
            const SweepPoint& pt = points[i];
            const auto status = [](const rtcbf::SimLog& l) {
                return l.status == rtcbf::RunStatus::Completed ? "completed"
                                                               : "failure";
            };
            csv += fmt9(pt.value);
            csv += ",";
            csv += fmt9(pt.fixed.t_fail);
            csv += ",";
            csv += status(pt.fixed);
            csv += ",";
            csv += fmt9(pt.rt.t_fail);
            csv += ",";
            csv += status(pt.rt);
            csv += "\n";

            char name[64];
            std::snprintf(name, sizeof(name), "/point_%03d.json", i);
            std::string body = "{\n  \"x0\": " + fmt9(pt.value) +
                               ",\n  \"fixed\": " +
                               rtcbf::summary_json(pt.fixed) +
                               ",\n  \"rt\": " + rtcbf::summary_json(pt.rt) +
                               "}\n";
            write_text(out_dir + name, body);
        }
        write_text(out_dir + "/sweep.csv", csv);
        log_info("sweep finished: " + std::to_string(count) + " points");
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
