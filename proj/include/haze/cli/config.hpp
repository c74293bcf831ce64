#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "haze/data/dataset.hpp"
#include "haze/dhr/dhrnet.hpp"
#include "haze/gen/ahg.hpp"
#include "haze/loss/losses.hpp"

namespace haze {

// Full run configuration. The canonical JSON form is what gets stored in
// checkpoints; unknown keys in a user-supplied file are hard errors.
struct RunConfig {
    uint64_t seed = 0;
    bool deterministic = false;

    struct Data {
        std::string root = "data/micro";
        int64_t train_size = 256;
        int num_pairs = 8;
        int micro_size = 128;
    } data;

    struct Ahg {
        int64_t base_width = 32;
        int64_t disc_width = 64;
        double lambda1 = 1.0;
        double lambda2 = 0.1;
        double lr_max = 1e-4;
        double lr_min = 1e-6;
        int64_t batch_size = 4;
        int64_t epochs = 400;
        int64_t steps = 0;  // 0: epochs * ceil(pairs / batch)
        int64_t checkpoint_every = 0;
        double alpha_min = 0.0;
        double alpha_max = 1.0;
        bool extended_alpha = false;  // widen sampling to [-0.2, 0.3]
    } ahg;

    PerlinParams perlin;

    struct Dhr {
        int64_t base_width = 50;
        int patch_size = 32;
        bool use_ape = true;
        double lr_max = 1e-4;
        double lr_min = 1e-6;
        int64_t batch_size = 4;
        int64_t epochs = 400;
        int64_t steps = 0;
        int64_t checkpoint_every = 0;
    } dhr;

    struct Loss {
        double lambda1 = 1.0;
        double lambda2 = 0.5;
        double lambda3 = 0.05;
        int n_negatives = 10;
        double smooth_l1_beta = 1.0;
        bool use_mncd = true;
        uint64_t extractor_seed = 0x5EEDF00D;
        std::string extractor_weights;  // optional checkpoint path
    } loss;

    AugmentSchedule augment;
    bool augment_enabled = true;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);

    // Defaults overlaid with the file (when non-empty). Unknown keys fail
    // with the offending dotted path named.
    static RunConfig load(const std::string& config_path);

    DHRConfig dhr_config() const;
    AhgConfig ahg_config() const;
    JointLossWeights loss_weights() const;

    // FNV-1a over the canonical JSON dump.
    uint64_t config_hash() const;
};

}  // namespace haze
