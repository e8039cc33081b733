#include "mpc/partial_encoder.hpp"

#include "mpc/error.hpp"

namespace mpc::nets {

PartialEncoderImpl::PartialEncoderImpl(const NetConfig& cfg) : cfg_(cfg) {
  f0 = register_module("f0", Mlp(3, cfg.enc_mlp, Activation::relu, true));
  int width = cfg.enc_mlp.back();
  for (int l = 0; l < cfg.enc_levels; ++l) {
    blocks_.push_back(register_module("block" + std::to_string(l),
                                      PointConv(width, 2 * width, cfg.weightnet_hidden, cfg.basis)));
    width *= 2;
  }
  head = register_module("head", Mlp(3 + width, cfg.enc_head, Activation::relu, false));
}

PartialFeatures PartialEncoderImpl::forward(const Tensor& X_P) {
  if (X_P.dim() != 3 || X_P.size(1) != cfg_.partial_points || X_P.size(2) != 3) {
    throw SizeError("encode_partial: expected [B," + std::to_string(cfg_.partial_points) + ",3] input");
  }
  PartialFeatures out;
  out.F0 = f0->forward(X_P);
  Tensor pts = X_P;
  Tensor feats = out.F0;
  out.level_points.push_back(pts);
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    auto& block = blocks_[l];
    // the first block keeps full resolution
    const Tensor next = l == 0 ? pts : gather_points(pts, downsample_index(pts));
    const std::int64_t k = std::min<std::int64_t>(cfg_.pointconv_k, pts.size(1));
    feats = torch::relu(block->forward_knn(pts, feats, next, k));
    if (l > 0) {
      pts = next;
      out.level_points.push_back(pts);
    }
  }
  out.X_L = pts;
  out.F_L = feats;
  out.f_P = std::get<0>(head->forward(torch::cat({pts, feats}, -1)).max(1));
  return out;
}

}  // namespace mpc::nets
