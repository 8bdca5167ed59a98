/*
 * Copyright 2026 The fedsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedsim/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

namespace fedsim {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void write_experiment_outputs(const ExperimentResult& result, const ordered_json& echo,
                              const std::string& dir) {
    fs::create_directories(dir);
    write_rounds_csv(result.records, (fs::path(dir) / "rounds.csv").string());
    write_summary_json(result.records, result.final_eval, echo,
                       (fs::path(dir) / "summary.json").string());
}

namespace {

// Tracks everything this invocation created so a failure can clean up
// without touching pre-existing files.
struct OutputTracker {
    std::vector<fs::path> files;
    std::vector<fs::path> dirs;  // most recently created last

    void created_dirs_for(const fs::path& target) {
        fs::path probe = target;
        std::vector<fs::path> missing;
        while (!probe.empty() && !fs::exists(probe)) {
            missing.push_back(probe);
            probe = probe.parent_path();
        }
        // Parents first so removal (reverse order) drops children first.
        for (auto it = missing.rbegin(); it != missing.rend(); ++it) dirs.push_back(*it);
    }

    void remove_all() {
        std::error_code ec;
        for (auto it = files.rbegin(); it != files.rend(); ++it) fs::remove(*it, ec);
        for (auto it = dirs.rbegin(); it != dirs.rend(); ++it) fs::remove(*it, ec);
    }
};

}  // namespace

int run_batch(const ExperimentConfig& cfg) {
    const fs::path out_root = cfg.resolved_output_dir();
    OutputTracker tracker;
    try {
        std::vector<std::optional<double>> repeat_means;
        for (int r = 0; r < cfg.repeats; ++r) {
            ExperimentConfig run_cfg = cfg;
            run_cfg.master_seed = cfg.master_seed + static_cast<std::uint64_t>(r);
            run_cfg.repeats = 1;  // the echo replays this single repeat
            const fs::path dir = out_root / ("repeat_" + std::to_string(r));
            tracker.created_dirs_for(dir);

            const ExperimentResult result = run_experiment(run_cfg);
            fs::create_directories(dir);
            const std::string rounds_path = (dir / "rounds.csv").string();
            const std::string summary_path = (dir / "summary.json").string();
            write_rounds_csv(result.records, rounds_path);
            tracker.files.emplace_back(rounds_path);
            write_summary_json(result.records, result.final_eval, config_echo(run_cfg),
                               summary_path);
            tracker.files.emplace_back(summary_path);

            repeat_means.push_back(result.final_eval.mean_acc);
            std::cout << "repeat " << r << ": final mean personalized accuracy = "
                      << (result.final_eval.mean_acc ? render9(*result.final_eval.mean_acc)
                                                     : std::string("n/a"))
                      << "\n";
        }

        ordered_json agg;
        agg["config"] = config_echo(cfg);
        agg["repeats"] = cfg.repeats;
        ordered_json per_repeat = ordered_json::array();
        std::vector<double> means;
        for (const std::optional<double>& m : repeat_means) {
            per_repeat.push_back(m ? ordered_json(round9(*m)) : ordered_json(nullptr));
            if (m) means.push_back(*m);
        }
        agg["per_repeat_final_mean_acc"] = per_repeat;
        if (!means.empty()) {
            double mean = 0.0;
            for (double m : means) mean += m;
            mean /= static_cast<double>(means.size());
            double var = 0.0;
            for (double m : means) var += (m - mean) * (m - mean);
            var /= static_cast<double>(means.size());
            agg["final_mean_acc_mean"] = round9(mean);
            agg["final_mean_acc_std"] = round9(std::sqrt(var));
        } else {
            agg["final_mean_acc_mean"] = nullptr;
            agg["final_mean_acc_std"] = nullptr;
        }

        const std::string agg_path = (out_root / "aggregate.json").string();
        std::ofstream out(agg_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + agg_path + " for writing");
        out << agg.dump(2) << "\n";
        if (!out) throw std::runtime_error("write failed for " + agg_path);
        std::cout << "wrote " << agg_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        tracker.remove_all();
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace fedsim
