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

#include "fedsim/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <stdexcept>

#include "fedsim/strategies.hpp"

namespace fedsim {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

enum class KeyType { kInt, kUint, kDouble, kBool, kString };

struct KeyHandler {
    const char* name;
    KeyType type;
    std::function<void(ExperimentConfig&, const json&)> set;
};

[[noreturn]] void fail_key(const std::string& key, const std::string& why) {
    throw std::invalid_argument("config key \"" + key + "\": " + why);
}

double as_double(const std::string& key, const json& v) {
    if (!v.is_number()) fail_key(key, "expected a number, got " + std::string(v.type_name()));
    return v.get<double>();
}

int as_int(const std::string& key, const json& v) {
    if (!v.is_number_integer()) {
        fail_key(key, "expected an integer, got " + std::string(v.type_name()));
    }
    return v.get<int>();
}

std::uint64_t as_uint(const std::string& key, const json& v) {
    const bool ok = v.is_number_unsigned() ||
                    (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    if (!ok) {
        fail_key(key, "expected a non-negative integer, got " + v.dump());
    }
    return v.get<std::uint64_t>();
}

bool as_bool(const std::string& key, const json& v) {
    if (!v.is_boolean()) fail_key(key, "expected true/false, got " + std::string(v.type_name()));
    return v.get<bool>();
}

std::string as_string(const std::string& key, const json& v) {
    if (!v.is_string()) fail_key(key, "expected a string, got " + std::string(v.type_name()));
    return v.get<std::string>();
}

const std::vector<KeyHandler>& handlers() {
    static const std::vector<KeyHandler> table = {
        {"dataset", KeyType::kString,
         [](ExperimentConfig& c, const json& v) { c.dataset = as_string("dataset", v); }},
        {"synth_classes", KeyType::kInt,
         [](ExperimentConfig& c, const json& v) { c.synth_classes = as_int("synth_classes", v); }},
        {"synth_per_class", KeyType::kInt,
         [](ExperimentConfig& c, const json& v) {
             c.synth_per_class = as_int("synth_per_class", v);
         }},
        {"synth_dim", KeyType::kInt,
         [](ExperimentConfig& c, const json& v) { c.synth_dim = as_int("synth_dim", v); }},
        {"synth_spread", KeyType::kDouble,
         [](ExperimentConfig& c, const json& v) { c.synth_spread = as_double("synth_spread", v); }},
        {"idx_images", KeyType::kString,
         [](ExperimentConfig& c, const json& v) { c.idx_images = as_string("idx_images", v); }},
        {"idx_labels", KeyType::kString,
         [](ExperimentConfig& c, const json& v) { c.idx_labels = as_string("idx_labels", v); }},
        {"partition", KeyType::kString,
         [](ExperimentConfig& c, const json& v) { c.partition = as_string("partition", v); }},
        {"alpha", KeyType::kDouble,
         [](ExperimentConfig& c, const json& v) { c.alpha = as_double("alpha", v); }},
        {"shards_per_client", KeyType::kInt,
         [](ExperimentConfig& c, const json& v) {
             c.shards_per_client = as_int("shards_per_client", v);
         }},
        {"test_fraction", KeyType::kDouble,
         [](ExperimentConfig& c, const json& v) {
             c.test_fraction = as_double("test_fraction", v);
         }},
        {"n_clients", KeyType::kInt,
         [](ExperimentConfig& c, const json& v) { c.n_clients = as_int("n_clients", v); }},
        {"participation_rate", KeyType::kDouble,
         [](ExperimentConfig& c, const json& v) {
             c.participation_rate = as_double("participation_rate", v);
         }},
        {"rounds", KeyType::kInt,
         [](ExperimentConfig& c, const json& v) { c.rounds = as_int("rounds", v); }},
        {"epochs", KeyType::kInt,
         [](ExperimentConfig& c, const json& v) { c.epochs = as_int("epochs", v); }},
        {"batch_size", KeyType::kInt,
         [](ExperimentConfig& c, const json& v) { c.batch_size = as_int("batch_size", v); }},
        {"lr", KeyType::kDouble,
         [](ExperimentConfig& c, const json& v) { c.lr = as_double("lr", v); }},
        {"momentum", KeyType::kDouble,
         [](ExperimentConfig& c, const json& v) { c.momentum = as_double("momentum", v); }},
        {"weight_decay", KeyType::kDouble,
         [](ExperimentConfig& c, const json& v) { c.weight_decay = as_double("weight_decay", v); }},
        {"strategy", KeyType::kString,
         [](ExperimentConfig& c, const json& v) { c.strategy = as_string("strategy", v); }},
        {"prox_mu", KeyType::kDouble,
         [](ExperimentConfig& c, const json& v) { c.prox_mu = as_double("prox_mu", v); }},
        {"lambda0", KeyType::kDouble,
         [](ExperimentConfig& c, const json& v) { c.lambda0 = as_double("lambda0", v); }},
        {"tau", KeyType::kDouble,
         [](ExperimentConfig& c, const json& v) { c.tau = as_double("tau", v); }},
        {"gamma", KeyType::kDouble,
         [](ExperimentConfig& c, const json& v) { c.gamma = as_double("gamma", v); }},
        {"annealing", KeyType::kBool,
         [](ExperimentConfig& c, const json& v) { c.annealing = as_bool("annealing", v); }},
        {"use_global_teacher", KeyType::kBool,
         [](ExperimentConfig& c, const json& v) {
             c.use_global_teacher = as_bool("use_global_teacher", v);
         }},
        {"use_historical_teacher", KeyType::kBool,
         [](ExperimentConfig& c, const json& v) {
             c.use_historical_teacher = as_bool("use_historical_teacher", v);
         }},
        {"kl_direction", KeyType::kString,
         [](ExperimentConfig& c, const json& v) {
             c.kl_direction = as_string("kl_direction", v);
         }},
        {"tau_squared", KeyType::kBool,
         [](ExperimentConfig& c, const json& v) { c.tau_squared = as_bool("tau_squared", v); }},
        {"literal_weights", KeyType::kBool,
         [](ExperimentConfig& c, const json& v) {
             c.literal_weights = as_bool("literal_weights", v);
         }},
        {"hidden_units", KeyType::kInt,
         [](ExperimentConfig& c, const json& v) { c.hidden_units = as_int("hidden_units", v); }},
        {"master_seed", KeyType::kUint,
         [](ExperimentConfig& c, const json& v) {
             c.master_seed = as_uint("master_seed", v);
             c.has_master_seed = true;
         }},
        {"repeats", KeyType::kInt,
         [](ExperimentConfig& c, const json& v) { c.repeats = as_int("repeats", v); }},
        {"threads", KeyType::kInt,
         [](ExperimentConfig& c, const json& v) { c.threads = as_int("threads", v); }},
        {"output_dir", KeyType::kString,
         [](ExperimentConfig& c, const json& v) { c.output_dir = as_string("output_dir", v); }},
    };
    return table;
}

const KeyHandler& find_handler(const std::string& key) {
    for (const KeyHandler& h : handlers()) {
        if (key == h.name) return h;
    }
    throw std::invalid_argument("unknown config key \"" + key + "\"");
}

json flag_value_to_json(const KeyHandler& handler, const std::string& raw) {
    try {
        switch (handler.type) {
            case KeyType::kInt:
                return std::stoi(raw);
            case KeyType::kUint:
                return static_cast<std::uint64_t>(std::stoull(raw));
            case KeyType::kDouble:
                return std::stod(raw);
            case KeyType::kBool:
                if (raw == "true" || raw == "1") return true;
                if (raw == "false" || raw == "0") return false;
                fail_key(handler.name, "expected true/false, got \"" + raw + "\"");
            case KeyType::kString:
                return raw;
        }
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        fail_key(handler.name, "cannot parse \"" + raw + "\"");
    }
    return nullptr;
}

void apply_object(ExperimentConfig& cfg, const json& object, const std::string& source) {
    if (!object.is_object()) {
        throw std::invalid_argument(source + ": config must be a flat JSON object");
    }
    for (const auto& [key, value] : object.items()) {
        find_handler(key).set(cfg, value);
    }
}

void check(bool ok, const std::string& key, const std::string& why) {
    if (!ok) fail_key(key, why);
}

}  // namespace

std::string ExperimentConfig::resolved_output_dir() const {
    if (!output_dir.empty()) return output_dir;
    if (const char* env = std::getenv("SIM_OUTPUT_DIR"); env != nullptr && env[0] != '\0') {
        return env;
    }
    return "sim_out";
}

void apply_config_key(ExperimentConfig& cfg, const std::string& key, const json& value) {
    find_handler(key).set(cfg, value);
}

void validate_config(const ExperimentConfig& cfg) {
    check(cfg.dataset == "synth" || cfg.dataset == "idx", "dataset", "must be synth or idx");
    check(cfg.synth_classes >= 2, "synth_classes", "must be >= 2");
    check(cfg.synth_per_class >= 1, "synth_per_class", "must be >= 1");
    check(cfg.synth_dim >= 1, "synth_dim", "must be >= 1");
    check(cfg.synth_spread > 0.0, "synth_spread", "must be > 0");
    if (cfg.dataset == "idx") {
        check(!cfg.idx_images.empty(), "idx_images", "required when dataset=idx");
        check(!cfg.idx_labels.empty(), "idx_labels", "required when dataset=idx");
    }
    check(cfg.partition == "dirichlet" || cfg.partition == "pathological", "partition",
          "must be dirichlet or pathological");
    check(cfg.alpha > 0.0, "alpha", "must be > 0");
    check(cfg.shards_per_client >= 1, "shards_per_client", "must be >= 1");
    check(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0, "test_fraction",
          "must be in (0,1)");
    check(cfg.n_clients >= 2, "n_clients", "must be >= 2");
    check(cfg.participation_rate > 0.0 && cfg.participation_rate <= 1.0, "participation_rate",
          "must be in (0,1]");
    check(std::floor(cfg.participation_rate * cfg.n_clients) >= 1.0, "participation_rate",
          "floor(rate * n_clients) must be >= 1");
    check(cfg.rounds >= 0, "rounds", "must be >= 0");
    check(cfg.epochs >= 0, "epochs", "must be >= 0");
    check(cfg.batch_size >= 1, "batch_size", "must be >= 1");
    check(cfg.lr > 0.0, "lr", "must be > 0");
    check(cfg.momentum >= 0.0 && cfg.momentum < 1.0, "momentum", "must be in [0,1)");
    check(cfg.weight_decay >= 0.0, "weight_decay", "must be >= 0");
    parse_strategy(cfg.strategy);  // throws on unknown names
    check(cfg.prox_mu >= 0.0, "prox_mu", "must be >= 0");
    check(cfg.lambda0 >= 0.0, "lambda0", "must be >= 0");
    check(cfg.tau > 0.0, "tau", "must be > 0");
    check(cfg.gamma > 0.0 && cfg.gamma <= 1.0, "gamma", "must be in (0,1]");
    check(cfg.kl_direction == "teacher_student" || cfg.kl_direction == "student_teacher",
          "kl_direction", "must be teacher_student or student_teacher");
    check(cfg.hidden_units >= 0, "hidden_units", "must be >= 0");
    check(cfg.has_master_seed, "master_seed", "required (no wall-clock default)");
    check(cfg.repeats >= 1, "repeats", "must be >= 1");
    check(cfg.threads >= 1, "threads", "must be >= 1");
}

ExperimentConfig load_config(const std::optional<std::string>& preset_name,
                             const std::optional<std::string>& file_path,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
    ExperimentConfig cfg;
    if (preset_name) {
        apply_object(cfg, preset_values(*preset_name), "preset " + *preset_name);
    }
    if (file_path) {
        std::ifstream in(*file_path);
        if (!in) {
            throw std::invalid_argument("config file not found: " + *file_path);
        }
        json object;
        try {
            object = json::parse(in);
        } catch (const json::parse_error& e) {
            throw std::invalid_argument("config file " + *file_path + ": " + e.what());
        }
        apply_object(cfg, object, *file_path);
    }
    for (const auto& [key, raw] : overrides) {
        const KeyHandler& handler = find_handler(key);
        handler.set(cfg, flag_value_to_json(handler, raw));
    }
    validate_config(cfg);
    return cfg;
}

ExperimentConfig parse_config(const std::string& file_path,
                              const std::vector<std::string>& override_tokens) {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (std::size_t i = 0; i < override_tokens.size(); ++i) {
        const std::string& token = override_tokens[i];
        if (token.rfind("--", 0) != 0) {
            throw std::invalid_argument("expected --key, got \"" + token + "\"");
        }
        if (i + 1 >= override_tokens.size()) {
            throw std::invalid_argument("flag " + token + " is missing a value");
        }
        overrides.emplace_back(token.substr(2), override_tokens[++i]);
    }
    return load_config(std::nullopt, file_path, overrides);
}

ordered_json config_echo(const ExperimentConfig& cfg) {
    ordered_json echo;
    echo["dataset"] = cfg.dataset;
    echo["synth_classes"] = cfg.synth_classes;
    echo["synth_per_class"] = cfg.synth_per_class;
    echo["synth_dim"] = cfg.synth_dim;
    echo["synth_spread"] = cfg.synth_spread;
    echo["idx_images"] = cfg.idx_images;
    echo["idx_labels"] = cfg.idx_labels;
    echo["partition"] = cfg.partition;
    echo["alpha"] = cfg.alpha;
    echo["shards_per_client"] = cfg.shards_per_client;
    echo["test_fraction"] = cfg.test_fraction;
    echo["n_clients"] = cfg.n_clients;
    echo["participation_rate"] = cfg.participation_rate;
    echo["rounds"] = cfg.rounds;
    echo["epochs"] = cfg.epochs;
    echo["batch_size"] = cfg.batch_size;
    echo["lr"] = cfg.lr;
    echo["momentum"] = cfg.momentum;
    echo["weight_decay"] = cfg.weight_decay;
    echo["strategy"] = cfg.strategy;
    echo["prox_mu"] = cfg.prox_mu;
    echo["lambda0"] = cfg.lambda0;
    echo["tau"] = cfg.tau;
    echo["gamma"] = cfg.gamma;
    echo["annealing"] = cfg.annealing;
    echo["use_global_teacher"] = cfg.use_global_teacher;
    echo["use_historical_teacher"] = cfg.use_historical_teacher;
    echo["kl_direction"] = cfg.kl_direction;
    echo["tau_squared"] = cfg.tau_squared;
    echo["literal_weights"] = cfg.literal_weights;
    echo["hidden_units"] = cfg.hidden_units;
    echo["master_seed"] = cfg.master_seed;
    echo["repeats"] = cfg.repeats;
    echo["threads"] = cfg.threads;
    echo["output_dir"] = cfg.output_dir;
    return echo;
}

std::vector<std::string> preset_names() {
    return {"paper-n20-practical", "paper-n20-pathological", "desk-synth-heterogeneous",
            "desk-synth-iid"};
}

ordered_json preset_values(const std::string& name) {
    // Desk-scale defaults shared by every preset; the paper presets keep the
    // published federation hyperparameters (n, r, T, alpha/s) on the
    // synthetic stand-in dataset.
    ordered_json base = {
        {"dataset", "synth"}, {"synth_classes", 10}, {"synth_per_class", 120},
        {"synth_dim", 16},    {"synth_spread", 1.0}, {"test_fraction", 0.2},
        {"strategy", "fedckd"},
        {"master_seed", 42},
    };
    if (name == "paper-n20-practical" || name == "paper-cifar100-n20-practical") {
        base["partition"] = "dirichlet";
        base["alpha"] = 0.10;
        base["n_clients"] = 20;
        base["participation_rate"] = 1.0;
        base["rounds"] = 50;
        base["synth_per_class"] = 240;
        base["repeats"] = 3;
        return base;
    }
    if (name == "paper-n20-pathological") {
        base["partition"] = "pathological";
        base["shards_per_client"] = 2;
        base["n_clients"] = 20;
        base["participation_rate"] = 1.0;
        base["rounds"] = 50;
        base["synth_per_class"] = 240;
        base["repeats"] = 3;
        return base;
    }
    if (name == "desk-synth-heterogeneous") {
        base["partition"] = "dirichlet";
        base["alpha"] = 0.1;
        base["n_clients"] = 10;
        base["participation_rate"] = 1.0;
        base["rounds"] = 30;
        return base;
    }
    if (name == "desk-synth-iid") {
        base["partition"] = "dirichlet";
        base["alpha"] = 1e6;
        base["n_clients"] = 10;
        base["participation_rate"] = 1.0;
        base["rounds"] = 30;
        return base;
    }
    throw std::invalid_argument("unknown preset \"" + name + "\"");
}

}  // namespace fedsim
