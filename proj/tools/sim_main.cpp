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

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedsim/config.hpp"
#include "fedsim/runner.hpp"

namespace {

void print_usage() {
    std::cout << "usage:\n"
              << "  sim run [--preset <name>] [--config <file.json>] [--key value]...\n"
              << "  sim presets\n"
              << "\n"
              << "Precedence: defaults < preset < config file < --key value flags.\n"
              << "Every config key can be overridden on the command line, e.g.\n"
              << "  sim run --preset desk-synth-heterogeneous --strategy fedavg --rounds 10\n"
              << "Outputs go to --output_dir, then $SIM_OUTPUT_DIR, then ./sim_out.\n";
}

int cmd_presets() {
    for (const std::string& name : fedsim::preset_names()) {
        std::cout << name << "\n  " << fedsim::preset_values(name).dump() << "\n";
    }
    return 0;
}

int cmd_run(const std::vector<std::string>& args) {
    std::optional<std::string> preset;
    std::optional<std::string> config_file;
    std::vector<std::pair<std::string, std::string>> overrides;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& arg = args[i];
        if (arg.rfind("--", 0) != 0) {
            std::cerr << "error: expected --key, got \"" << arg << "\"\n";
            return 2;
        }
        if (i + 1 >= args.size()) {
            std::cerr << "error: flag " << arg << " is missing a value\n";
            return 2;
        }
        const std::string key = arg.substr(2);
        const std::string& value = args[++i];
        if (key == "preset") {
            preset = value;
        } else if (key == "config") {
            config_file = value;
        } else {
            overrides.emplace_back(key, value);
        }
    }
    try {
        const fedsim::ExperimentConfig cfg = fedsim::load_config(preset, config_file, overrides);
        return fedsim::run_batch(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
        print_usage();
        return args.empty() ? 2 : 0;
    }
    const std::string command = args[0];
    args.erase(args.begin());
    if (command == "run") return cmd_run(args);
    if (command == "presets") return cmd_presets();
    std::cerr << "error: unknown command \"" << command << "\"\n";
    print_usage();
    return 2;
}
