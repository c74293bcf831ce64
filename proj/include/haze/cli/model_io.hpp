#pragma once

#include <memory>

#include "haze/cli/config.hpp"
#include "haze/core/checkpoint.hpp"
#include "haze/core/optim.hpp"

namespace haze {

// Checkpoint tensors <-> module parameters, matched by dotted name.
void load_module_state(Module& module, const Checkpoint& ckpt, const std::string& prefix);
void append_module_state(Checkpoint& ckpt, const Module& module, const std::string& prefix);

// Adam moments and step counter, stored as "<prefix>.m.N" / "<prefix>.v.N".
void append_optimizer_state(Checkpoint& ckpt, Adam& opt, const std::string& prefix);
void load_optimizer_state(Adam& opt, const Checkpoint& ckpt, const std::string& prefix);

struct DhrBundle {
    RunConfig config;
    std::unique_ptr<DHRNet> net;
    Checkpoint raw;  // kept for optimizer restoration and roundtrip saves
};

struct AhgBundle {
    RunConfig config;
    std::unique_ptr<AHGModel> model;
    Checkpoint raw;
};

void save_dhr_checkpoint(const std::string& path, const RunConfig& cfg, const DHRNet& net,
                         Adam* opt, int64_t epoch, int64_t step,
                         const nlohmann::json& history = nlohmann::json::array());
DhrBundle load_dhr_checkpoint(const std::string& path);

void save_ahg_checkpoint(const std::string& path, const RunConfig& cfg, const AHGModel& model,
                         Adam* gen_opt, Adam* disc_opt, int64_t epoch, int64_t step,
                         const nlohmann::json& history = nlohmann::json::array());
AhgBundle load_ahg_checkpoint(const std::string& path);

}  // namespace haze
