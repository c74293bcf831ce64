#include "haze/gen/ahg.hpp"

#include <cmath>

namespace haze {

void AhgConfig::validate() const {
    if (base_width < 4) throw ConfigError("AhgConfig: base_width must be >= 4");
    if (disc_width < 4) throw ConfigError("AhgConfig: disc_width must be >= 4");
    if (lambda1 < 0.0 || lambda2 < 0.0) throw ConfigError("AhgConfig: negative loss weight");
}

ResBlock::ResBlock(Rng& rng, int64_t channels)
    : c1(rng, channels, channels, 3, 1, 1), c2(rng, channels, channels, 3, 1, 1) {
    add_child("c1", &c1);
    add_child("c2", &c2);
}

Var ResBlock::forward(const Var& x) const { return add(x, c2.forward(relu(c1.forward(x)))); }

AhgUNet::AhgUNet(Rng& rng, int64_t in_ch, int64_t width)
    : stem(rng, in_ch, width, 3, 1, 1),
      down1(rng, width, 2 * width, 3, 2, 1),
      down2(rng, 2 * width, 4 * width, 3, 2, 1),
      r1a(rng, 2 * width),
      r1b(rng, 2 * width),
      r2a(rng, 4 * width),
      r2b(rng, 4 * width),
      up1(rng, 4 * width, 2 * width, 3, 2, 1, 1),
      up2(rng, 2 * width, width, 3, 2, 1, 1),
      skip1(rng, 4 * width, 2 * width, 1, 1, 0),
      skip2(rng, 2 * width, width, 1, 1, 0),
      u1a(rng, 2 * width),
      u1b(rng, 2 * width),
      u2a(rng, width),
      u2b(rng, width) {
    add_child("stem", &stem);
    add_child("down1", &down1);
    add_child("down2", &down2);
    add_child("r1a", &r1a);
    add_child("r1b", &r1b);
    add_child("r2a", &r2a);
    add_child("r2b", &r2b);
    add_child("up1", &up1);
    add_child("up2", &up2);
    add_child("skip1", &skip1);
    add_child("skip2", &skip2);
    add_child("u1a", &u1a);
    add_child("u1b", &u1b);
    add_child("u2a", &u2a);
    add_child("u2b", &u2b);
}

Var AhgUNet::forward(const Var& x) const {
    const int64_t H = x.dim(2), W = x.dim(3);
    const int64_t pad_h = (4 - H % 4) % 4;
    const int64_t pad_w = (4 - W % 4) % 4;
    Var xin = (pad_h || pad_w) ? reflection_pad2d(x, 0, pad_h, 0, pad_w) : x;

    Var s0 = relu(stem.forward(xin));
    Var e1 = r1b.forward(r1a.forward(relu(down1.forward(s0))));
    Var e2 = r2b.forward(r2a.forward(relu(down2.forward(e1))));
    Var d1 = relu(up1.forward(e2));
    d1 = relu(skip1.forward(concat({d1, e1}, 1)));
    d1 = u1b.forward(u1a.forward(d1));
    Var d0 = relu(up2.forward(d1));
    d0 = relu(skip2.forward(concat({d0, s0}, 1)));
    d0 = u2b.forward(u2a.forward(d0));
    if (pad_h || pad_w) d0 = crop2d(d0, 0, 0, H, W);
    return d0;
}

AHGEncoder::AHGEncoder(Rng& rng, int64_t width)
    : trunk(rng, 6, width),
      head_clear(rng, width, 1, 3, 1, 1),
      head_hazy(rng, width, 1, 3, 1, 1) {
    add_child("trunk", &trunk);
    add_child("head_clear", &head_clear);
    add_child("head_hazy", &head_hazy);
}

std::pair<Var, Var> AHGEncoder::forward(const Var& clear, const Var& hazy) const {
    if (!clear.val().same_shape(hazy.val()))
        throw InvalidInput("AHGEncoder: clear/hazy shape mismatch");
    Var features = trunk.forward(concat({clear, hazy}, 1));
    return {sigmoid(head_clear.forward(features)), sigmoid(head_hazy.forward(features))};
}

AHGDecoder::AHGDecoder(Rng& rng, int64_t width)
    : trunk(rng, 4, width), head(rng, width, 3, 3, 1, 1) {
    add_child("trunk", &trunk);
    add_child("head", &head);
}

Var AHGDecoder::forward(const Var& clear, const Var& density) const {
    if (density.dim(0) != clear.dim(0) || density.dim(1) != 1 ||
        density.dim(2) != clear.dim(2) || density.dim(3) != clear.dim(3))
        throw InvalidInput("AHGDecoder: density map does not match the clear image");
    return sigmoid(head.forward(trunk.forward(concat({clear, density}, 1))));
}

PatchDiscriminator::PatchDiscriminator(Rng& rng, int64_t width)
    : c1(rng, 3, width, 4, 2, 1),
      c2(rng, width, 2 * width, 4, 2, 1),
      c3(rng, 2 * width, 4 * width, 4, 2, 1),
      c4(rng, 4 * width, 8 * width, 4, 1, 1),
      c5(rng, 8 * width, 1, 4, 1, 1) {
    add_child("c1", &c1);
    add_child("c2", &c2);
    add_child("c3", &c3);
    add_child("c4", &c4);
    add_child("c5", &c5);
}

Var PatchDiscriminator::forward(const Var& x) const {
    Var h = leaky_relu(c1.forward(x), 0.2);
    h = leaky_relu(c2.forward(h), 0.2);
    h = leaky_relu(c3.forward(h), 0.2);
    h = leaky_relu(c4.forward(h), 0.2);
    return c5.forward(h);
}

namespace {
uint64_t validated_seed(const AhgConfig& cfg, uint64_t seed) {
    cfg.validate();
    return seed;
}
}  // namespace

AHGModel::AHGModel(const AhgConfig& cfg, uint64_t seed)
    : config_(cfg),
      init_rng_(validated_seed(cfg, seed)),
      encoder(init_rng_, cfg.base_width),
      decoder(init_rng_, cfg.base_width),
      discriminator(init_rng_, cfg.disc_width) {}

std::vector<Var> AHGModel::generator_parameters() const {
    std::vector<Var> params = encoder.parameters();
    auto dec = decoder.parameters();
    params.insert(params.end(), dec.begin(), dec.end());
    return params;
}

std::pair<DensityMap, DensityMap> encode(const AHGModel& model, const Tensor& clear,
                                         const Tensor& hazy) {
    if (clear.ndim() != 3 || hazy.ndim() != 3)
        throw InvalidInput("encode: expected (3,H,W) images");
    NoGradGuard no_grad;
    Var vc(clear.reshaped({1, clear.dim(0), clear.dim(1), clear.dim(2)}));
    Var vh(hazy.reshaped({1, hazy.dim(0), hazy.dim(1), hazy.dim(2)}));
    auto [mc, mh] = model.encoder.forward(vc, vh);
    DensityMap dc{mc.val().reshaped({1, clear.dim(1), clear.dim(2)}).clone(),
                  DensitySource::EncodedFromClear};
    DensityMap dh{mh.val().reshaped({1, hazy.dim(1), hazy.dim(2)}).clone(),
                  DensitySource::EncodedFromHazy};
    return {dc, dh};
}

Tensor decode(const AHGModel& model, const Tensor& clear, const DensityMap& density) {
    if (clear.ndim() != 3) throw InvalidInput("decode: expected a (3,H,W) image");
    if (density.values.ndim() != 3 || density.values.dim(0) != 1 ||
        density.values.dim(1) != clear.dim(1) || density.values.dim(2) != clear.dim(2))
        throw InvalidInput("decode: density map size does not match the image");
    NoGradGuard no_grad;
    Var vc(clear.reshaped({1, 3, clear.dim(1), clear.dim(2)}));
    Var vd(density.values.reshaped({1, 1, clear.dim(1), clear.dim(2)}));
    return model.decoder.forward(vc, vd).val().reshaped({3, clear.dim(1), clear.dim(2)}).clone();
}

DensityMap blend_density(const DensityMap& m_c, const DensityMap& m_h, double alpha) {
    if (!m_c.values.same_shape(m_h.values)) throw InvalidInput("blend_density: shape mismatch");
    DensityMap out;
    out.source = DensitySource::Blended;
    out.values = Tensor(m_c.values.shape());
    const double* pc = m_c.values.data();
    const double* ph = m_h.values.data();
    double* po = out.values.data();
    for (int64_t i = 0; i < out.values.numel(); ++i) {
        double v = alpha * pc[i] + (1.0 - alpha) * ph[i];
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        po[i] = v;
    }
    return out;
}

DensityMap modulate_density(const DensityMap& m, const NoiseField& field) {
    if (field.values.ndim() != 2 || field.values.dim(0) != m.values.dim(1) ||
        field.values.dim(1) != m.values.dim(2))
        throw InvalidInput("modulate_density: field size does not match the map");
    DensityMap out;
    out.source = DensitySource::Modulated;
    out.values = Tensor(m.values.shape());
    const double* pm = m.values.data();
    const double* pf = field.values.data();
    double* po = out.values.data();
    for (int64_t i = 0; i < out.values.numel(); ++i) {
        double v = pm[i] * pf[i];
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        po[i] = v;
    }
    return out;
}

AhgLossRecord ahg_train_step(AHGModel& model, const Var& clear_batch, const Var& hazy_batch,
                             Adam& gen_opt, Adam& disc_opt, double lr) {
    if (!clear_batch.val().same_shape(hazy_batch.val()))
        throw InvalidInput("ahg_train_step: batch shape mismatch");
    AhgLossRecord record;

    // generator update
    auto [mc, mh] = model.encoder.forward(clear_batch, hazy_batch);
    Var ic_hat = model.decoder.forward(clear_batch, mc);
    Var ih_hat = model.decoder.forward(clear_batch, mh);
    Var l1_h = l1_loss(ih_hat, hazy_batch);
    Var l1_c = l1_loss(ic_hat, clear_batch);
    Var adv_g = mul_scalar(mean_all(square(add_scalar(model.discriminator.forward(ih_hat), -1.0))),
                           0.5);
    Var g_total = add(add(l1_h, mul_scalar(l1_c, model.config().lambda1)),
                      mul_scalar(adv_g, model.config().lambda2));
    record.l1_hazy = l1_h.val()(0);
    record.l1_clear = l1_c.val()(0);
    record.adv_g = adv_g.val()(0);
    record.total = g_total.val()(0);
    if (!std::isfinite(record.total))
        throw NumericError("ahg_train_step: non-finite generator loss (l1_h=" +
                           std::to_string(record.l1_hazy) +
                           ", l1_c=" + std::to_string(record.l1_clear) +
                           ", adv=" + std::to_string(record.adv_g) + ")");
    gen_opt.zero_grad();
    disc_opt.zero_grad();  // the adversarial term also reaches the critic
    g_total.backward();
    gen_opt.step(lr);

    // discriminator update on the detached fake
    Var fake = ih_hat.detach();
    Var d_real = mul_scalar(
        mean_all(square(add_scalar(model.discriminator.forward(hazy_batch), -1.0))), 0.5);
    Var d_fake = mul_scalar(mean_all(square(model.discriminator.forward(fake))), 0.5);
    Var d_total = add(d_real, d_fake);
    record.adv_d = d_total.val()(0);
    if (!std::isfinite(record.adv_d))
        throw NumericError("ahg_train_step: non-finite discriminator loss");
    disc_opt.zero_grad();
    d_total.backward();
    disc_opt.step(lr);
    return record;
}

Tensor synthesize(const AHGModel& model, const Tensor& clear, const DensityMap& m_c,
                  const DensityMap& m_h, const HazeSynthesisSpec& spec) {
    DensityMap blended = blend_density(m_c, m_h, spec.alpha);
    if (spec.enable_modulation) {
        NoiseField field = perlin_distribution(static_cast<int>(blended.values.dim(1)),
                                               static_cast<int>(blended.values.dim(2)),
                                               spec.perlin);
        field = normalize_field(field, 0.35, 1.65);  // mean stays near 1
        blended = modulate_density(blended, field);
    }
    return decode(model, clear, blended);
}

}  // namespace haze
