#pragma once

#include <string>
#include <vector>

#include "haze/cli/config.hpp"

namespace haze::cli {

// All commands return a process exit code: 0 success, 1 runtime failure,
// 2 usage/config error. Thrown ConfigError/DataIntegrityError map to 2 in
// the launcher, everything else to 1.

int cmd_gen_micro_dataset(const RunConfig& cfg, const std::string& out_dir);

int cmd_train_ahg(const RunConfig& cfg, const std::string& data_root, const std::string& out_dir,
                  const std::string& resume_path = "");

int cmd_gen_haze(const RunConfig& runtime, const std::string& ahg_ckpt,
                 const std::string& clear_dir, const std::string& out_dir,
                 const std::vector<double>& alphas, int variants_per_alpha);

int cmd_train_dhr(const RunConfig& cfg, const std::string& data_root, const std::string& out_dir,
                  const std::string& ahg_ckpt, bool no_ahg, const std::string& resume_path = "");

int cmd_dehaze(const RunConfig& runtime, const std::string& dhr_ckpt, const std::string& input,
               const std::string& out_dir, int patch_size_override);

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, const std::string& out_dir);

int cmd_ablate(const RunConfig& cfg, const std::string& data_root, const std::string& out_dir);

}  // namespace haze::cli
