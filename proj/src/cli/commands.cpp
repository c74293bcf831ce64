#include "haze/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "haze/cli/model_io.hpp"
#include "haze/core/runtime.hpp"
#include "haze/data/png_io.hpp"
#include "haze/metrics/metrics.hpp"

namespace fs = std::filesystem;

namespace haze::cli {

namespace {

Tensor stack_batch(const std::vector<Tensor>& images) {
    const int64_t B = static_cast<int64_t>(images.size());
    const int64_t C = images[0].dim(0), H = images[0].dim(1), W = images[0].dim(2);
    Tensor out({B, C, H, W});
    for (int64_t b = 0; b < B; ++b)
        std::copy(images[size_t(b)].data(), images[size_t(b)].data() + C * H * W,
                  out.data() + b * C * H * W);
    return out;
}

Tensor as_batch1(const Tensor& image) {
    return image.reshaped({1, image.dim(0), image.dim(1), image.dim(2)});
}

// Identical crop/resize window applied to every tensor of a training item.
void crop_item(TrainingItem& item, Rng& rng, int64_t target) {
    const int64_t H = item.input.dim(1), W = item.input.dim(2);
    if (std::min(H, W) < target) {
        item.input = resize_bilinear(item.input, target, target);
        item.target = resize_bilinear(item.target, target, target);
        for (Tensor& n : item.negatives) n = resize_bilinear(n, target, target);
        return;
    }
    const int64_t max_mult = std::min(H, W) / target;
    const int64_t side = target * (1 + static_cast<int64_t>(rng.uniform_int(max_mult)));
    const int64_t top = H > side ? static_cast<int64_t>(rng.uniform_int(H - side + 1)) : 0;
    const int64_t left = W > side ? static_cast<int64_t>(rng.uniform_int(W - side + 1)) : 0;
    auto apply = [&](const Tensor& img) {
        Tensor cropped({img.dim(0), side, side});
        for (int64_t c = 0; c < img.dim(0); ++c)
            for (int64_t y = 0; y < side; ++y)
                for (int64_t x = 0; x < side; ++x) cropped(c, y, x) = img(c, top + y, left + x);
        return side == target ? cropped : resize_bilinear(cropped, target, target);
    };
    item.input = apply(item.input);
    item.target = apply(item.target);
    for (Tensor& n : item.negatives) n = apply(n);
}

// Draws alpha and a fresh Perlin seed per call, then runs the AHG pipeline.
HazySynthesizer make_synthesizer(const AHGModel& model, const RunConfig& cfg) {
    const double lo = cfg.ahg.extended_alpha ? -0.2 : cfg.ahg.alpha_min;
    const double hi = cfg.ahg.extended_alpha ? 0.3 : cfg.ahg.alpha_max;
    PerlinParams perlin = cfg.perlin;
    return [&model, lo, hi, perlin](const Tensor& clear, const Tensor& hazy, Rng& rng) {
        auto [mc, mh] = encode(model, clear, hazy);
        HazeSynthesisSpec spec;
        spec.alpha = rng.uniform(lo, hi);
        spec.perlin = perlin;
        spec.perlin.seed = rng.next_u64();
        spec.enable_modulation = true;
        return synthesize(model, clear, mc, mh, spec);
    };
}

std::vector<std::string> list_pngs(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DataIntegrityError("not a directory: " + dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

int64_t steps_for(int64_t configured_steps, int64_t epochs, int64_t pairs, int64_t batch) {
    if (configured_steps > 0) return configured_steps;
    const int64_t per_epoch = std::max<int64_t>(1, (pairs + batch - 1) / batch);
    return epochs * per_epoch;
}

struct DhrTrainResult {
    std::unique_ptr<DHRNet> net;
    nlohmann::json history = nlohmann::json::array();
    int64_t steps = 0;
};

// The shared training loop behind cmd_train_dhr and cmd_ablate.
DhrTrainResult train_dhr_loop(const RunConfig& cfg, const PairedDataset& dataset,
                              const AHGModel* ahg, std::ostream* log,
                              DhrBundle* resume = nullptr) {
    DhrTrainResult result;
    int64_t start_step = 0;
    std::unique_ptr<Adam> opt;
    if (resume) {
        result.net = std::move(resume->net);
        opt = std::make_unique<Adam>(result.net->parameters());
        load_optimizer_state(*opt, resume->raw, "opt");
        start_step = resume->raw.step;
    } else {
        result.net = std::make_unique<DHRNet>(cfg.dhr_config(), cfg.seed);
        opt = std::make_unique<Adam>(result.net->parameters());
    }
    FeatureExtractor extractor(cfg.loss.extractor_seed);
    if (!cfg.loss.extractor_weights.empty()) extractor.load_weights(cfg.loss.extractor_weights);

    // The synthesizer serves two roles: input substitution (gated by the
    // schedule) and contrastive negatives (always, when an AHG is given).
    HazySynthesizer synth;
    const HazySynthesizer* synth_ptr = nullptr;
    if (ahg != nullptr) {
        synth = make_synthesizer(*ahg, cfg);
        synth_ptr = &synth;
    }

    const int64_t total_steps = steps_for(cfg.dhr.steps, cfg.dhr.epochs,
                                          static_cast<int64_t>(dataset.size()),
                                          cfg.dhr.batch_size);
    const int64_t per_epoch =
        std::max<int64_t>(1, (static_cast<int64_t>(dataset.size()) + cfg.dhr.batch_size - 1) /
                                 cfg.dhr.batch_size);
    const int64_t total_epochs = std::max<int64_t>(1, total_steps / per_epoch);
    const JointLossWeights weights = cfg.loss_weights();
    const int n_negatives =
        (synth_ptr != nullptr && weights.lambda3 != 0.0) ? cfg.loss.n_negatives : 1;
    AugmentSchedule schedule = cfg.augment;
    if (!cfg.augment_enabled || synth_ptr == nullptr) {
        schedule.p_start = 0.0;
        schedule.p_end = 0.0;
    }

    Rng rng(mix_u64(cfg.seed, 0xD4A));
    for (int64_t step = start_step; step < total_steps; ++step) {
        const int64_t epoch = step / per_epoch;
        std::vector<TrainingItem> items;
        std::vector<Tensor> inputs, targets;
        for (int64_t b = 0; b < cfg.dhr.batch_size; ++b) {
            TrainingItem item = sample_training_item(epoch, total_epochs, schedule, dataset,
                                                     synth_ptr, n_negatives, rng);
            crop_item(item, rng, cfg.data.train_size);
            inputs.push_back(item.input);
            targets.push_back(item.target);
            items.push_back(std::move(item));
        }
        Var input(stack_batch(inputs));
        Var target(stack_batch(targets));
        Var pred = result.net->forward(input);

        Var rec = smooth_l1_loss(pred, target, weights.smooth_l1_beta);
        Var structural = add_scalar(neg(ms_ssim(pred, target)), 1.0);
        Var total = add(mul_scalar(rec, weights.lambda1), mul_scalar(structural, weights.lambda2));
        double mncd_value = 0.0;
        if (weights.lambda3 != 0.0) {
            Var contrast_sum;
            for (size_t b = 0; b < items.size(); ++b) {
                ContrastBatch batch;
                batch.anchor = slice_dim0(pred, static_cast<int64_t>(b), 1);
                batch.positive = slice_dim0(target, static_cast<int64_t>(b), 1);
                for (const Tensor& n : items[b].negatives) batch.negatives.emplace_back(as_batch1(n));
                batch.weights = items[b].negative_weights;
                Var term = mncd(batch, extractor);
                contrast_sum = contrast_sum.defined() ? add(contrast_sum, term) : term;
            }
            Var contrast_mean = mul_scalar(contrast_sum, 1.0 / static_cast<double>(items.size()));
            mncd_value = contrast_mean.val()(0);
            total = add(total, mul_scalar(contrast_mean, weights.lambda3));
        }
        if (!std::isfinite(total.val()(0)))
            throw NumericError("train-dhr: non-finite loss at step " + std::to_string(step));

        const double lr = cosine_lr(cfg.dhr.lr_max, cfg.dhr.lr_min, step, total_steps);
        opt->zero_grad();
        total.backward();
        opt->step(lr);

        nlohmann::json line;
        line["step"] = step;
        line["lr"] = lr;
        line["smooth_l1"] = rec.val()(0);
        line["ms_ssim_term"] = structural.val()(0);
        line["mncd"] = mncd_value;
        line["total"] = total.val()(0);
        result.history.push_back(line["total"]);
        if (log) *log << line.dump() << "\n";
    }
    result.steps = total_steps;
    return result;
}

}  // namespace

int cmd_gen_micro_dataset(const RunConfig& cfg, const std::string& out_dir) {
    generate_micro_dataset(cfg.data.num_pairs, out_dir, cfg.seed, cfg.data.micro_size);
    std::cout << "wrote " << cfg.data.num_pairs << " pairs to " << out_dir << "\n";
    return 0;
}

int cmd_train_ahg(const RunConfig& cfg, const std::string& data_root, const std::string& out_dir,
                  const std::string& resume_path) {
    set_deterministic(cfg.deterministic);
    if (!fs::is_directory(data_root))
        throw DataIntegrityError("dataset directory does not exist: " + data_root);
    PairedDataset dataset(data_root);
    fs::create_directories(out_dir);

    std::unique_ptr<AHGModel> model;
    std::unique_ptr<Adam> gen_opt, disc_opt;
    int64_t start_step = 0;
    nlohmann::json history = nlohmann::json::array();
    if (!resume_path.empty()) {
        AhgBundle bundle = load_ahg_checkpoint(resume_path);
        model = std::move(bundle.model);
        gen_opt = std::make_unique<Adam>(model->generator_parameters());
        disc_opt = std::make_unique<Adam>(model->discriminator.parameters());
        load_optimizer_state(*gen_opt, bundle.raw, "opt_g");
        load_optimizer_state(*disc_opt, bundle.raw, "opt_d");
        start_step = bundle.raw.step;
        history = bundle.raw.extra.value("history", nlohmann::json::array());
    } else {
        model = std::make_unique<AHGModel>(cfg.ahg_config(), cfg.seed);
        gen_opt = std::make_unique<Adam>(model->generator_parameters());
        disc_opt = std::make_unique<Adam>(model->discriminator.parameters());
    }

    const int64_t total_steps = steps_for(cfg.ahg.steps, cfg.ahg.epochs,
                                          static_cast<int64_t>(dataset.size()),
                                          cfg.ahg.batch_size);
    std::ofstream log(fs::path(out_dir) / "train_ahg_log.jsonl",
                      start_step > 0 ? std::ios::app : std::ios::trunc);
    Rng rng(mix_u64(cfg.seed, 0xA46));

    for (int64_t step = start_step; step < total_steps; ++step) {
        std::vector<Tensor> clears, hazies;
        for (int64_t b = 0; b < cfg.ahg.batch_size; ++b) {
            const size_t idx = static_cast<size_t>(rng.uniform_int(dataset.size()));
            auto [hazy, clear] = dataset.load_pair(idx);
            auto [ch, cc] = random_crop_resize(hazy, clear, rng, cfg.data.train_size);
            hazies.push_back(ch);
            clears.push_back(cc);
        }
        const double lr = cosine_lr(cfg.ahg.lr_max, cfg.ahg.lr_min, step, total_steps);
        AhgLossRecord rec = ahg_train_step(*model, Var(stack_batch(clears)),
                                           Var(stack_batch(hazies)), *gen_opt, *disc_opt, lr);
        nlohmann::json line;
        line["step"] = step;
        line["lr"] = lr;
        line["l1_hazy"] = rec.l1_hazy;
        line["l1_clear"] = rec.l1_clear;
        line["adv_g"] = rec.adv_g;
        line["adv_d"] = rec.adv_d;
        line["total"] = rec.total;
        log << line.dump() << "\n";
        history.push_back(rec.total);
        if (cfg.ahg.checkpoint_every > 0 && (step + 1) % cfg.ahg.checkpoint_every == 0)
            save_ahg_checkpoint(
                (fs::path(out_dir) / ("ahg_step" + std::to_string(step + 1) + ".hzck")).string(),
                cfg, *model, gen_opt.get(), disc_opt.get(), 0, step + 1, history);
    }
    save_ahg_checkpoint((fs::path(out_dir) / "ahg.hzck").string(), cfg, *model, gen_opt.get(),
                        disc_opt.get(), 0, total_steps, history);
    std::cout << "ahg checkpoint: " << (fs::path(out_dir) / "ahg.hzck").string() << "\n";
    return 0;
}

int cmd_gen_haze(const RunConfig& runtime, const std::string& ahg_ckpt,
                 const std::string& clear_dir, const std::string& out_dir,
                 const std::vector<double>& alphas, int variants_per_alpha) {
    set_deterministic(runtime.deterministic);
    if (alphas.empty()) throw ConfigError("gen-haze: at least one alpha is required");
    if (variants_per_alpha < 1) throw ConfigError("gen-haze: variants must be >= 1");
    AhgBundle bundle = load_ahg_checkpoint(ahg_ckpt);

    const std::vector<std::string> names = list_pngs(clear_dir);
    if (names.empty()) throw DataIntegrityError("no .png inputs in " + clear_dir);
    const fs::path hazy_dir = fs::path(clear_dir).parent_path() / "hazy";
    const bool paired = fs::is_directory(hazy_dir);
    if (!paired)
        std::cerr << "gen-haze: no hazy/ sibling directory; encoding clear images against "
                     "themselves\n";
    fs::create_directories(out_dir);

    int written = 0;
    for (size_t i = 0; i < names.size(); ++i) {
        Tensor clear = read_png((fs::path(clear_dir) / names[i]).string());
        Tensor hazy = clear;
        if (paired && fs::exists(hazy_dir / names[i]))
            hazy = read_png((hazy_dir / names[i]).string());
        auto [mc, mh] = encode(*bundle.model, clear, hazy);
        const std::string stem = fs::path(names[i]).stem().string();
        for (size_t ai = 0; ai < alphas.size(); ++ai)
            for (int v = 0; v < variants_per_alpha; ++v) {
                HazeSynthesisSpec spec;
                spec.alpha = alphas[ai];
                spec.perlin = runtime.perlin;
                spec.perlin.seed = mix_u64(runtime.seed, i, ai, static_cast<uint64_t>(v));
                Tensor out = synthesize(*bundle.model, clear, mc, mh, spec);
                char suffix[64];
                std::snprintf(suffix, sizeof(suffix), "_a%+.2f_v%02d", alphas[ai], v);
                const std::string base = stem + suffix;
                write_png((fs::path(out_dir) / (base + ".png")).string(), out);
                nlohmann::json meta;
                meta["source"] = names[i];
                meta["alpha"] = alphas[ai];
                meta["perlin"] = {{"octaves", spec.perlin.octaves},
                                  {"persistence", spec.perlin.persistence},
                                  {"frequency_scale", spec.perlin.frequency_scale},
                                  {"base_cell", spec.perlin.base_cell},
                                  {"seed", spec.perlin.seed}};
                meta["paired_encoding"] = paired;
                std::ofstream ms(fs::path(out_dir) / (base + ".json"));
                ms << meta.dump(2) << "\n";
                ++written;
            }
    }
    std::cout << "wrote " << written << " synthesized images to " << out_dir << "\n";
    return 0;
}

int cmd_train_dhr(const RunConfig& cfg, const std::string& data_root, const std::string& out_dir,
                  const std::string& ahg_ckpt, bool no_ahg, const std::string& resume_path) {
    set_deterministic(cfg.deterministic);
    if (!fs::is_directory(data_root))
        throw DataIntegrityError("dataset directory does not exist: " + data_root);
    PairedDataset dataset(data_root);
    fs::create_directories(out_dir);

    std::unique_ptr<AhgBundle> ahg;
    if (!no_ahg && !ahg_ckpt.empty()) ahg = std::make_unique<AhgBundle>(load_ahg_checkpoint(ahg_ckpt));

    RunConfig effective = cfg;
    if (no_ahg) {
        effective.augment_enabled = false;  // Table-3 "DHR" row behavior
    }
    std::ofstream log(fs::path(out_dir) / "train_dhr_log.jsonl",
                      resume_path.empty() ? std::ios::trunc : std::ios::app);

    std::unique_ptr<DhrBundle> resume;
    if (!resume_path.empty()) resume = std::make_unique<DhrBundle>(load_dhr_checkpoint(resume_path));
    DhrTrainResult result = train_dhr_loop(effective, dataset, ahg ? ahg->model.get() : nullptr,
                                           &log, resume.get());
    save_dhr_checkpoint((fs::path(out_dir) / "dhr.hzck").string(), effective, *result.net,
                        nullptr, 0, result.steps, result.history);
    std::cout << "dhr checkpoint: " << (fs::path(out_dir) / "dhr.hzck").string() << "\n";
    return 0;
}

int cmd_dehaze(const RunConfig& runtime, const std::string& dhr_ckpt, const std::string& input,
               const std::string& out_dir, int patch_size_override) {
    set_deterministic(runtime.deterministic);
    DhrBundle bundle = load_dhr_checkpoint(dhr_ckpt);
    if (patch_size_override > 0) {
        RunConfig patched = bundle.config;
        patched.dhr.patch_size = patch_size_override;
        auto net = std::make_unique<DHRNet>(patched.dhr_config(), patched.seed);
        load_module_state(*net, bundle.raw, "model.");
        bundle.net = std::move(net);
    }

    std::vector<fs::path> inputs;
    if (fs::is_directory(input)) {
        for (const std::string& name : list_pngs(input)) inputs.push_back(fs::path(input) / name);
    } else if (fs::exists(input)) {
        inputs.push_back(input);
    } else {
        throw DataIntegrityError("input does not exist: " + input);
    }
    fs::create_directories(out_dir);

    int ok = 0, failed = 0;
    NoGradGuard no_grad;
    for (const fs::path& path : inputs) {
        try {
            Tensor image = read_png(path.string());
            Var out = bundle.net->forward(Var(as_batch1(image)));
            write_png((fs::path(out_dir) / path.filename()).string(),
                      out.val().reshaped({3, image.dim(1), image.dim(2)}));
            ++ok;
        } catch (const IoError& e) {
            std::cerr << "dehaze: skipping " << path.string() << ": " << e.what() << "\n";
            ++failed;
        }
    }
    std::cout << "dehazed " << ok << " image(s), " << failed << " skipped\n";
    return (ok == 0 && failed > 0) ? 1 : 0;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, const std::string& out_dir) {
    const std::vector<std::string> preds = list_pngs(pred_dir);
    const std::vector<std::string> gts = list_pngs(gt_dir);
    std::vector<std::string> unmatched;
    for (const auto& n : preds)
        if (std::find(gts.begin(), gts.end(), n) == gts.end()) unmatched.push_back("pred:" + n);
    for (const auto& n : gts)
        if (std::find(preds.begin(), preds.end(), n) == preds.end()) unmatched.push_back("gt:" + n);
    if (!unmatched.empty()) {
        std::string list;
        for (const auto& n : unmatched) list += " " + n;
        throw DataIntegrityError("unmatched files:" + list);
    }
    if (preds.empty()) throw DataIntegrityError("no .png files to evaluate in " + pred_dir);

    EvalReport report;
    for (const auto& name : preds) {
        Tensor p = read_png((fs::path(pred_dir) / name).string());
        Tensor g = read_png((fs::path(gt_dir) / name).string());
        EvalReport::Row row;
        row.name = name;
        row.psnr = psnr(p, g);
        row.ssim = ssim(p, g);
        report.rows.push_back(row);
    }
    report.finalize();
    fs::create_directories(out_dir);
    {
        std::ofstream csv(fs::path(out_dir) / "eval.csv");
        csv << report.to_csv();
        std::ofstream js(fs::path(out_dir) / "eval.json");
        js << report.to_json();
    }
    std::cout << "images: " << report.rows.size() << "  mean PSNR: " << report.mean_psnr
              << "  mean SSIM: " << report.mean_ssim << "\n";
    return 0;
}

namespace {

struct AblationRow {
    std::string name;
    bool ape, ahg, mncd;
    double psnr_value, ssim_value;
    uint64_t config_hash;
};

// Trains one variant and evaluates mean PSNR/SSIM over the dataset.
AblationRow run_ablation_variant(const std::string& name, RunConfig cfg,
                                 const PairedDataset& dataset, const AHGModel* ahg) {
    AblationRow row;
    row.name = name;
    row.ape = cfg.dhr.use_ape;
    row.ahg = ahg != nullptr && cfg.augment_enabled;
    row.mncd = cfg.loss.use_mncd;
    row.config_hash = cfg.config_hash();
    DhrTrainResult result = train_dhr_loop(cfg, dataset, ahg, nullptr);

    double psnr_sum = 0.0, ssim_sum = 0.0;
    NoGradGuard no_grad;
    for (size_t i = 0; i < dataset.size(); ++i) {
        auto [hazy, clear] = dataset.load_pair(i);
        Var out = result.net->forward(Var(as_batch1(hazy)));
        Tensor dehazed = out.val().reshaped({3, hazy.dim(1), hazy.dim(2)});
        psnr_sum += psnr(dehazed, clear);
        ssim_sum += ssim(dehazed, clear);
    }
    row.psnr_value = psnr_sum / static_cast<double>(dataset.size());
    row.ssim_value = ssim_sum / static_cast<double>(dataset.size());
    return row;
}

}  // namespace

int cmd_ablate(const RunConfig& cfg, const std::string& data_root, const std::string& out_dir) {
    set_deterministic(cfg.deterministic);
    if (!fs::is_directory(data_root))
        throw DataIntegrityError("dataset directory does not exist: " + data_root);
    PairedDataset dataset(data_root);
    fs::create_directories(out_dir);

    // one AHG shared by the rows that use it
    AHGModel ahg(cfg.ahg_config(), cfg.seed);
    {
        Adam gen(ahg.generator_parameters());
        Adam disc(ahg.discriminator.parameters());
        const int64_t steps = steps_for(cfg.ahg.steps, cfg.ahg.epochs,
                                        static_cast<int64_t>(dataset.size()), cfg.ahg.batch_size);
        Rng rng(mix_u64(cfg.seed, 0xAB7));
        for (int64_t step = 0; step < steps; ++step) {
            std::vector<Tensor> clears, hazies;
            for (int64_t b = 0; b < cfg.ahg.batch_size; ++b) {
                const size_t idx = static_cast<size_t>(rng.uniform_int(dataset.size()));
                auto [hazy, clear] = dataset.load_pair(idx);
                auto [ch, cc] = random_crop_resize(hazy, clear, rng, cfg.data.train_size);
                hazies.push_back(ch);
                clears.push_back(cc);
            }
            ahg_train_step(ahg, Var(stack_batch(clears)), Var(stack_batch(hazies)), gen, disc,
                           cosine_lr(cfg.ahg.lr_max, cfg.ahg.lr_min, step, steps));
        }
    }

    // module toggle grid, mirroring the Baseline / DHR / DHR+AHG / API rows
    std::vector<AblationRow> module_rows;
    {
        RunConfig base = cfg;
        base.dhr.use_ape = false;
        base.augment_enabled = false;
        base.loss.use_mncd = false;
        module_rows.push_back(run_ablation_variant("Baseline", base, dataset, nullptr));

        RunConfig dhr_only = cfg;
        dhr_only.augment_enabled = false;
        dhr_only.loss.use_mncd = false;
        module_rows.push_back(run_ablation_variant("DHR", dhr_only, dataset, nullptr));

        RunConfig dhr_ahg = cfg;
        dhr_ahg.loss.use_mncd = false;
        module_rows.push_back(run_ablation_variant("DHR+AHG", dhr_ahg, dataset, &ahg));

        RunConfig api = cfg;
        module_rows.push_back(run_ablation_variant("API", api, dataset, &ahg));
    }

    // patch size grid
    const int patch_sizes[5] = {8, 16, 32, 64, 128};
    std::vector<AblationRow> patch_rows;
    for (int ps : patch_sizes) {
        RunConfig variant = cfg;
        variant.dhr.patch_size = ps;
        patch_rows.push_back(
            run_ablation_variant("PATCH_SIZE " + std::to_string(ps), variant, dataset, &ahg));
    }

    std::ostringstream table;
    table << "| Models   | APE | AHG | MNCD | PSNR | SSIM |\n";
    table << "|----------|-----|-----|------|------|------|\n";
    char buf[160];
    for (const AblationRow& r : module_rows) {
        std::snprintf(buf, sizeof(buf), "| %-8s | %-3s | %-3s | %-4s | %.3f | %.3f |\n",
                      r.name.c_str(), r.ape ? "x" : "", r.ahg ? "x" : "", r.mncd ? "x" : "",
                      r.psnr_value, r.ssim_value);
        table << buf;
    }
    table << "\n| PATCH_SIZE |";
    for (int ps : patch_sizes) table << " " << ps << " |";
    table << "\n| AVG PSNR |";
    for (const AblationRow& r : patch_rows) {
        std::snprintf(buf, sizeof(buf), " %.3f |", r.psnr_value);
        table << buf;
    }
    table << "\n| AVG SSIM |";
    for (const AblationRow& r : patch_rows) {
        std::snprintf(buf, sizeof(buf), " %.3f |", r.ssim_value);
        table << buf;
    }
    table << "\n";
    std::cout << table.str();
    {
        std::ofstream md(fs::path(out_dir) / "ablation.md");
        md << table.str();
        nlohmann::json j;
        auto to_json_rows = [](const std::vector<AblationRow>& rows) {
            nlohmann::json arr = nlohmann::json::array();
            for (const AblationRow& r : rows) {
                nlohmann::json e;
                e["name"] = r.name;
                e["ape"] = r.ape;
                e["ahg"] = r.ahg;
                e["mncd"] = r.mncd;
                e["psnr"] = r.psnr_value;
                e["ssim"] = r.ssim_value;
                e["config_hash"] = r.config_hash;
                arr.push_back(e);
            }
            return arr;
        };
        j["modules"] = to_json_rows(module_rows);
        j["patch_size"] = to_json_rows(patch_rows);
        std::ofstream js(fs::path(out_dir) / "ablation.json");
        js << j.dump(2) << "\n";
    }
    return 0;
}

}  // namespace haze::cli
