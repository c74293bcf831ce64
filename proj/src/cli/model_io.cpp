#include "haze/cli/model_io.hpp"

#include <algorithm>

namespace haze {

void load_module_state(Module& module, const Checkpoint& ckpt, const std::string& prefix) {
    for (auto& [name, param] : module.named_parameters()) {
        const Tensor* t = ckpt.find(prefix + name);
        if (!t) throw IoError("checkpoint is missing tensor " + prefix + name);
        if (!t->same_shape(param.val()))
            throw IoError("checkpoint shape mismatch for " + prefix + name + ": stored " +
                          shape_string(*t) + ", model expects " + shape_string(param.val()));
        std::copy(t->data(), t->data() + t->numel(), param.mutable_val().data());
    }
}

void append_module_state(Checkpoint& ckpt, const Module& module, const std::string& prefix) {
    for (const auto& [name, param] : module.named_parameters())
        ckpt.tensors.emplace_back(prefix + name, param.val());
}

void append_optimizer_state(Checkpoint& ckpt, Adam& opt, const std::string& prefix) {
    for (size_t i = 0; i < opt.moments1().size(); ++i) {
        ckpt.tensors.emplace_back(prefix + ".m." + std::to_string(i), opt.moments1()[i]);
        ckpt.tensors.emplace_back(prefix + ".v." + std::to_string(i), opt.moments2()[i]);
    }
    ckpt.extra[prefix + "_steps"] = opt.step_count();
}

void load_optimizer_state(Adam& opt, const Checkpoint& ckpt, const std::string& prefix) {
    for (size_t i = 0; i < opt.moments1().size(); ++i) {
        const Tensor* m = ckpt.find(prefix + ".m." + std::to_string(i));
        const Tensor* v = ckpt.find(prefix + ".v." + std::to_string(i));
        if (!m || !v) throw IoError("checkpoint is missing optimizer state " + prefix);
        std::copy(m->data(), m->data() + m->numel(), opt.moments1()[i].data());
        std::copy(v->data(), v->data() + v->numel(), opt.moments2()[i].data());
    }
    const std::string key = prefix + "_steps";
    if (ckpt.extra.contains(key)) opt.set_step_count(ckpt.extra[key].get<int64_t>());
}

void save_dhr_checkpoint(const std::string& path, const RunConfig& cfg, const DHRNet& net,
                         Adam* opt, int64_t epoch, int64_t step, const nlohmann::json& history) {
    Checkpoint ckpt;
    ckpt.kind = "dhr";
    ckpt.config = cfg.to_json();
    ckpt.epoch = epoch;
    ckpt.step = step;
    ckpt.extra["history"] = history;
    append_module_state(ckpt, net, "model.");
    if (opt) append_optimizer_state(ckpt, *opt, "opt");
    save_checkpoint(path, ckpt);
}

DhrBundle load_dhr_checkpoint(const std::string& path) {
    DhrBundle bundle;
    bundle.raw = load_checkpoint(path);
    if (bundle.raw.kind != "dhr")
        throw IoError("not a dhr checkpoint (kind=" + bundle.raw.kind + "): " + path);
    bundle.config = RunConfig::from_json(bundle.raw.config);
    bundle.net = std::make_unique<DHRNet>(bundle.config.dhr_config(), bundle.config.seed);
    load_module_state(*bundle.net, bundle.raw, "model.");
    return bundle;
}

void save_ahg_checkpoint(const std::string& path, const RunConfig& cfg, const AHGModel& model,
                         Adam* gen_opt, Adam* disc_opt, int64_t epoch, int64_t step,
                         const nlohmann::json& history) {
    Checkpoint ckpt;
    ckpt.kind = "ahg";
    ckpt.config = cfg.to_json();
    ckpt.epoch = epoch;
    ckpt.step = step;
    ckpt.extra["history"] = history;
    append_module_state(ckpt, model.encoder, "encoder.");
    append_module_state(ckpt, model.decoder, "decoder.");
    append_module_state(ckpt, model.discriminator, "discriminator.");
    if (gen_opt) append_optimizer_state(ckpt, *gen_opt, "opt_g");
    if (disc_opt) append_optimizer_state(ckpt, *disc_opt, "opt_d");
    save_checkpoint(path, ckpt);
}

AhgBundle load_ahg_checkpoint(const std::string& path) {
    AhgBundle bundle;
    bundle.raw = load_checkpoint(path);
    if (bundle.raw.kind != "ahg")
        throw IoError("not an ahg checkpoint (kind=" + bundle.raw.kind + "): " + path);
    bundle.config = RunConfig::from_json(bundle.raw.config);
    bundle.model = std::make_unique<AHGModel>(bundle.config.ahg_config(), bundle.config.seed);
    load_module_state(bundle.model->encoder, bundle.raw, "encoder.");
    load_module_state(bundle.model->decoder, bundle.raw, "decoder.");
    load_module_state(bundle.model->discriminator, bundle.raw, "discriminator.");
    return bundle;
}

}  // namespace haze
