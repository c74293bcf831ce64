#include "haze/dhr/dhrnet.hpp"

#include <cmath>

namespace haze {

void DHRConfig::validate() const {
    if (base_width < 10) throw ConfigError("DHRConfig: base_width must be >= 10");
    if (patch_size < 1) throw ConfigError("DHRConfig: patch_size must be >= 1");
    if (attn_reduction < 1) throw ConfigError("DHRConfig: attn_reduction must be >= 1");
}

namespace {
uint64_t validated_seed(const DHRConfig& cfg, uint64_t seed) {
    cfg.validate();
    return seed;
}
}  // namespace

DHRNet::DHRNet(const DHRConfig& cfg, uint64_t seed)
    : init_rng_(validated_seed(cfg, seed)),
      cfg_(cfg),
      stem(init_rng_, 3, cfg.base_width, 3, 1, 1),
      down1(init_rng_, cfg.base_width, 2 * cfg.base_width, 3, 2, 1),
      down2(init_rng_, 2 * cfg.base_width, 4 * cfg.base_width, 3, 2, 1),
      down3(init_rng_, 4 * cfg.base_width, 8 * cfg.base_width, 3, 2, 1),
      dil_d1(init_rng_, 2 * cfg.base_width, cfg.attn_reduction),
      dil_d2(init_rng_, 4 * cfg.base_width, cfg.attn_reduction),
      dil_d3(init_rng_, 8 * cfg.base_width, cfg.attn_reduction),
      attn_d2(init_rng_, 4 * cfg.base_width, cfg.attn_reduction),
      attn_d3(init_rng_, 8 * cfg.base_width, cfg.attn_reduction),
      mid(init_rng_, 8 * cfg.base_width, cfg.attn_reduction),
      up3(init_rng_, 8 * cfg.base_width, 4 * cfg.base_width, 4, 2, 1, 0),
      up2(init_rng_, 4 * cfg.base_width, 2 * cfg.base_width, 4, 2, 1, 0),
      up1(init_rng_, 2 * cfg.base_width, cfg.base_width, 4, 2, 1, 0),
      fuse3(init_rng_, 8 * cfg.base_width, 4 * cfg.base_width, 3, 1, 1),
      fuse2(init_rng_, 4 * cfg.base_width, 2 * cfg.base_width, 3, 1, 1),
      fuse1(init_rng_, 2 * cfg.base_width, cfg.base_width, 3, 1, 1),
      dil_u3(init_rng_, 4 * cfg.base_width, cfg.attn_reduction),
      dil_u2(init_rng_, 2 * cfg.base_width, cfg.attn_reduction),
      dil_u1(init_rng_, cfg.base_width, cfg.attn_reduction),
      attn_u3(init_rng_, 4 * cfg.base_width, cfg.attn_reduction),
      attn_u2(init_rng_, 2 * cfg.base_width, cfg.attn_reduction),
      head(init_rng_, cfg.base_width, 3, 3, 1, 1) {
    if (cfg_.use_ape) {
        ape_first = std::make_unique<APEBlock>(init_rng_, 2 * cfg.base_width, cfg.attn_reduction);
        ape_last = std::make_unique<APEBlock>(init_rng_, cfg.base_width, cfg.attn_reduction);
    } else {
        alt_first =
            std::make_unique<AttentionBlock>(init_rng_, 2 * cfg.base_width, cfg.attn_reduction);
        alt_last = std::make_unique<AttentionBlock>(init_rng_, cfg.base_width, cfg.attn_reduction);
    }
    add_child("stem", &stem);
    add_child("down1", &down1);
    add_child("down2", &down2);
    add_child("down3", &down3);
    add_child("dil_d1", &dil_d1);
    add_child("dil_d2", &dil_d2);
    add_child("dil_d3", &dil_d3);
    if (ape_first) add_child("ape_first", ape_first.get());
    if (alt_first) add_child("alt_first", alt_first.get());
    add_child("attn_d2", &attn_d2);
    add_child("attn_d3", &attn_d3);
    add_child("mid", &mid);
    add_child("up3", &up3);
    add_child("up2", &up2);
    add_child("up1", &up1);
    add_child("fuse3", &fuse3);
    add_child("fuse2", &fuse2);
    add_child("fuse1", &fuse1);
    add_child("dil_u3", &dil_u3);
    add_child("dil_u2", &dil_u2);
    add_child("dil_u1", &dil_u1);
    add_child("attn_u3", &attn_u3);
    add_child("attn_u2", &attn_u2);
    if (ape_last) add_child("ape_last", ape_last.get());
    if (alt_last) add_child("alt_last", alt_last.get());
    add_child("head", &head);
}

Var DHRNet::forward(const Var& x) const {
    const int64_t H = x.dim(2), W = x.dim(3);
    const int grid_n = grid_for(H, W);
    const int64_t pad_h = (8 - H % 8) % 8;
    const int64_t pad_w = (8 - W % 8) % 8;
    Var xin = (pad_h || pad_w) ? reflection_pad2d(x, 0, pad_h, 0, pad_w) : x;

    Var x0 = relu(stem.forward(xin));
    Var e1 = dil_d1.forward(relu(down1.forward(x0)));
    e1 = ape_first ? ape_first->forward(e1, grid_n) : alt_first->forward(e1);
    Var e2 = attn_d2.forward(dil_d2.forward(relu(down2.forward(e1))));
    Var e3 = attn_d3.forward(dil_d3.forward(relu(down3.forward(e2))));
    Var m = mid.forward(e3);

    Var u = relu(up3.forward(m));
    u = relu(fuse3.forward(concat({u, e2}, 1)));
    u = attn_u3.forward(dil_u3.forward(u));
    u = relu(up2.forward(u));
    u = relu(fuse2.forward(concat({u, e1}, 1)));
    u = attn_u2.forward(dil_u2.forward(u));
    u = relu(up1.forward(u));
    u = relu(fuse1.forward(concat({u, x0}, 1)));
    u = dil_u1.forward(u);
    u = ape_last ? ape_last->forward(u, grid_n) : alt_last->forward(u);

    Var y = sigmoid(head.forward(u));
    if (pad_h || pad_w) y = crop2d(y, 0, 0, H, W);

    if (!MacCounter::active()) {
        const double* p = y.val().data();
        for (int64_t i = 0; i < y.numel(); ++i)
            if (!std::isfinite(p[i]))
                throw NumericError("DHRNet: non-finite activation in the output");
    }
    return y;
}

int DHRNet::grid_for(int64_t height, int64_t width) const {
    const double side = static_cast<double>(std::min(height, width));
    const int n = static_cast<int>(std::lround(side / cfg_.patch_size));
    return std::max(1, n);
}

int64_t count_parameters(const Module& m) { return m.parameter_count(); }

int64_t count_macs(const DHRNet& net, int64_t height, int64_t width) {
    NoGradGuard no_grad;
    MacCountGuard guard;
    Tensor probe({1, 3, height, width});
    net.forward(Var(probe));
    return MacCounter::total();
}

}  // namespace haze
