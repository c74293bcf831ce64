#include "haze/cli/config.hpp"

#include <fstream>

namespace haze {

namespace {

// Any key present in the user file but absent from the canonical schema is
// a misspelling; silent absorption is the top reproducibility hazard.
void check_unknown_keys(const nlohmann::json& user, const nlohmann::json& schema,
                        const std::string& prefix) {
    if (!user.is_object()) return;
    for (const auto& [key, value] : user.items()) {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        if (!schema.contains(key)) throw ConfigError("unknown config key: " + path);
        if (value.is_object()) check_unknown_keys(value, schema.at(key), path);
    }
}

void merge_into(nlohmann::json& base, const nlohmann::json& overlay) {
    for (const auto& [key, value] : overlay.items()) {
        if (value.is_object() && base.contains(key) && base[key].is_object())
            merge_into(base[key], value);
        else
            base[key] = value;
    }
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["deterministic"] = deterministic;
    j["data"]["root"] = data.root;
    j["data"]["train_size"] = data.train_size;
    j["data"]["num_pairs"] = data.num_pairs;
    j["data"]["micro_size"] = data.micro_size;
    j["ahg"]["base_width"] = ahg.base_width;
    j["ahg"]["disc_width"] = ahg.disc_width;
    j["ahg"]["lambda1"] = ahg.lambda1;
    j["ahg"]["lambda2"] = ahg.lambda2;
    j["ahg"]["lr_max"] = ahg.lr_max;
    j["ahg"]["lr_min"] = ahg.lr_min;
    j["ahg"]["batch_size"] = ahg.batch_size;
    j["ahg"]["epochs"] = ahg.epochs;
    j["ahg"]["steps"] = ahg.steps;
    j["ahg"]["checkpoint_every"] = ahg.checkpoint_every;
    j["ahg"]["alpha_min"] = ahg.alpha_min;
    j["ahg"]["alpha_max"] = ahg.alpha_max;
    j["ahg"]["extended_alpha"] = ahg.extended_alpha;
    j["perlin"]["octaves"] = perlin.octaves;
    j["perlin"]["persistence"] = perlin.persistence;
    j["perlin"]["frequency_scale"] = perlin.frequency_scale;
    j["perlin"]["base_cell"] = perlin.base_cell;
    j["dhr"]["base_width"] = dhr.base_width;
    j["dhr"]["patch_size"] = dhr.patch_size;
    j["dhr"]["use_ape"] = dhr.use_ape;
    j["dhr"]["lr_max"] = dhr.lr_max;
    j["dhr"]["lr_min"] = dhr.lr_min;
    j["dhr"]["batch_size"] = dhr.batch_size;
    j["dhr"]["epochs"] = dhr.epochs;
    j["dhr"]["steps"] = dhr.steps;
    j["dhr"]["checkpoint_every"] = dhr.checkpoint_every;
    j["loss"]["lambda1"] = loss.lambda1;
    j["loss"]["lambda2"] = loss.lambda2;
    j["loss"]["lambda3"] = loss.lambda3;
    j["loss"]["n_negatives"] = loss.n_negatives;
    j["loss"]["smooth_l1_beta"] = loss.smooth_l1_beta;
    j["loss"]["use_mncd"] = loss.use_mncd;
    j["loss"]["extractor_seed"] = loss.extractor_seed;
    j["loss"]["extractor_weights"] = loss.extractor_weights;
    j["augment"]["p_start"] = augment.p_start;
    j["augment"]["p_end"] = augment.p_end;
    j["augment"]["enabled"] = augment_enabled;
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig cfg;
    try {
        cfg.seed = j.at("seed").get<uint64_t>();
        cfg.deterministic = j.at("deterministic").get<bool>();
        const auto& d = j.at("data");
        cfg.data.root = d.at("root").get<std::string>();
        cfg.data.train_size = d.at("train_size").get<int64_t>();
        cfg.data.num_pairs = d.at("num_pairs").get<int>();
        cfg.data.micro_size = d.at("micro_size").get<int>();
        const auto& a = j.at("ahg");
        cfg.ahg.base_width = a.at("base_width").get<int64_t>();
        cfg.ahg.disc_width = a.at("disc_width").get<int64_t>();
        cfg.ahg.lambda1 = a.at("lambda1").get<double>();
        cfg.ahg.lambda2 = a.at("lambda2").get<double>();
        cfg.ahg.lr_max = a.at("lr_max").get<double>();
        cfg.ahg.lr_min = a.at("lr_min").get<double>();
        cfg.ahg.batch_size = a.at("batch_size").get<int64_t>();
        cfg.ahg.epochs = a.at("epochs").get<int64_t>();
        cfg.ahg.steps = a.at("steps").get<int64_t>();
        cfg.ahg.checkpoint_every = a.at("checkpoint_every").get<int64_t>();
        cfg.ahg.alpha_min = a.at("alpha_min").get<double>();
        cfg.ahg.alpha_max = a.at("alpha_max").get<double>();
        cfg.ahg.extended_alpha = a.at("extended_alpha").get<bool>();
        const auto& p = j.at("perlin");
        cfg.perlin.octaves = p.at("octaves").get<int>();
        cfg.perlin.persistence = p.at("persistence").get<double>();
        cfg.perlin.frequency_scale = p.at("frequency_scale").get<double>();
        cfg.perlin.base_cell = p.at("base_cell").get<int>();
        const auto& h = j.at("dhr");
        cfg.dhr.base_width = h.at("base_width").get<int64_t>();
        cfg.dhr.patch_size = h.at("patch_size").get<int>();
        cfg.dhr.use_ape = h.at("use_ape").get<bool>();
        cfg.dhr.lr_max = h.at("lr_max").get<double>();
        cfg.dhr.lr_min = h.at("lr_min").get<double>();
        cfg.dhr.batch_size = h.at("batch_size").get<int64_t>();
        cfg.dhr.epochs = h.at("epochs").get<int64_t>();
        cfg.dhr.steps = h.at("steps").get<int64_t>();
        cfg.dhr.checkpoint_every = h.at("checkpoint_every").get<int64_t>();
        const auto& l = j.at("loss");
        cfg.loss.lambda1 = l.at("lambda1").get<double>();
        cfg.loss.lambda2 = l.at("lambda2").get<double>();
        cfg.loss.lambda3 = l.at("lambda3").get<double>();
        cfg.loss.n_negatives = l.at("n_negatives").get<int>();
        cfg.loss.smooth_l1_beta = l.at("smooth_l1_beta").get<double>();
        cfg.loss.use_mncd = l.at("use_mncd").get<bool>();
        cfg.loss.extractor_seed = l.at("extractor_seed").get<uint64_t>();
        cfg.loss.extractor_weights = l.at("extractor_weights").get<std::string>();
        const auto& g = j.at("augment");
        cfg.augment.p_start = g.at("p_start").get<double>();
        cfg.augment.p_end = g.at("p_end").get<double>();
        cfg.augment_enabled = g.at("enabled").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& config_path) {
    nlohmann::json merged = RunConfig{}.to_json();
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) throw ConfigError("cannot open config file: " + config_path);
        nlohmann::json user = nlohmann::json::parse(is, nullptr, false);
        if (user.is_discarded()) throw ConfigError("config is not valid JSON: " + config_path);
        check_unknown_keys(user, merged, "");
        merge_into(merged, user);
    }
    return from_json(merged);
}

DHRConfig RunConfig::dhr_config() const {
    DHRConfig cfg;
    cfg.base_width = dhr.base_width;
    cfg.patch_size = dhr.patch_size;
    cfg.use_ape = dhr.use_ape;
    return cfg;
}

AhgConfig RunConfig::ahg_config() const {
    AhgConfig cfg;
    cfg.base_width = ahg.base_width;
    cfg.disc_width = ahg.disc_width;
    cfg.lambda1 = ahg.lambda1;
    cfg.lambda2 = ahg.lambda2;
    return cfg;
}

JointLossWeights RunConfig::loss_weights() const {
    JointLossWeights w;
    w.lambda1 = loss.lambda1;
    w.lambda2 = loss.lambda2;
    w.lambda3 = loss.use_mncd ? loss.lambda3 : 0.0;
    w.smooth_l1_beta = loss.smooth_l1_beta;
    return w;
}

uint64_t RunConfig::config_hash() const {
    const std::string dump = to_json().dump();
    uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

}  // namespace haze
