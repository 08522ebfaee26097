#include "errnet/errnet.hpp"

#include <stdexcept>
#include <string>

namespace errnet {

namespace {

Tensor resize_to(const Tensor& t, const Tensor& like) {
  return bilinear_resize(t, like.shape().h, like.shape().w);
}

}  // namespace

Aspp::Aspp(ParameterStore& store, std::size_t in_ch, std::size_t mid_ch, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < kAsppDilations.size(); ++i) {
    const std::size_t d = kAsppDilations[i];
    branches_[i] = make_conv(store, "aspp.branch_d" + std::to_string(d), in_ch, mid_ch, 3, 1, d, d, rng);
  }
  fuse_ = make_conv(store, "aspp.fuse", in_ch + 4 * mid_ch, mid_ch, 3, 1, 1, 1, rng);
  head_ = make_conv(store, "aspp.head", mid_ch, 1, 1, 1, 0, 1, rng);
}

Tensor Aspp::branch(std::size_t index, const Tensor& e5) const {
  return conv_block(e5, branches_.at(index));
}

Tensor Aspp::forward(const Tensor& e5) const {
  std::vector<Tensor> parts{e5};
  for (std::size_t i = 0; i < branches_.size(); ++i) parts.push_back(branch(i, e5));
  return conv2d(conv_block(concat_channels(parts), fuse_), head_);
}

Sea::Sea(ParameterStore& store, std::size_t c1, std::size_t c2, std::mt19937_64& rng) {
  constexpr std::size_t k = kEdgeChannels;
  reduce1_ = make_conv(store, "sea.reduce1", c1, k, 3, 1, 1, 1, rng);
  reduce2_ = make_conv(store, "sea.reduce2", c2, k, 3, 1, 1, 1, rng);
  switch_ = make_conv(store, "sea.switch", k, k, 3, 1, 1, 1, rng);
  residual1_ = make_conv(store, "sea.residual1", k, k, 3, 1, 1, 1, rng);
  residual2_ = make_conv(store, "sea.residual2", k, k, 3, 1, 1, 1, rng);
  fuse_ = make_conv(store, "sea.fuse", 2 * k, k, 3, 1, 1, 1, rng);
  edge_head_ = make_conv(store, "sea.edge_head", k, 1, 3, 1, 1, 1, rng);
}

SeaOutput Sea::forward(const Tensor& e1, const Tensor& e2) const {
  const Shape& a = e1.shape();
  const Shape& b = e2.shape();
  if (a.n != b.n || a.h != b.h || a.w != b.w) {
    throw std::invalid_argument("SEA inputs must share spatial size, got " + a.str() + " and " +
                                b.str());
  }
  const Tensor r1 = conv_block(e1, reduce1_);
  const Tensor r2 = conv_block(e2, reduce2_);
  SeaOutput out;
  out.switcher = conv_block(mul(r1, r2), switch_);
  const Tensor left = conv_block(add(r1, out.switcher), residual1_);
  const Tensor right = conv_block(add(r2, out.switcher), residual2_);
  out.edge_features = conv_block(concat_channels({left, right}), fuse_);
  out.edge_logits = conv2d(out.edge_features, edge_head_);
  return out;
}

Rru::Rru(ParameterStore& store, int level, std::size_t semantic_ch, std::mt19937_64& rng)
    : level_(level), semantic_ch_(semantic_ch) {
  if (level < 3 || level > 5) throw std::invalid_argument("RRU level must be 3, 4 or 5");
  const std::string prefix = "rru" + std::to_string(level);
  fuse_ = make_conv(store, prefix + ".fuse", kEdgeChannels + semantic_ch, kRruMidChannels, 3, 1, 1, 1, rng);
  head_ = make_conv(store, prefix + ".head", kRruMidChannels, 1, 1, 1, 0, 1, rng);
}

RruOutput Rru::forward(const NgesPriors& priors) const {
  if (level_ == 5 && priors.neighbour) {
    throw std::invalid_argument("RRU level 5 takes no neighbour prior");
  }
  if (level_ < 5 && !priors.neighbour) {
    throw std::invalid_argument("RRU level " + std::to_string(level_) + " requires a neighbour prior");
  }
  const Tensor& semantic = priors.semantic;
  if (semantic.shape().c != semantic_ch_) {
    throw std::invalid_argument("RRU level " + std::to_string(level_) + " expects " +
                                std::to_string(semantic_ch_) + " semantic channels, got " +
                                std::to_string(semantic.shape().c));
  }

  RruOutput out;
  out.prior_logits = resize_to(priors.global, semantic);
  if (priors.neighbour) out.prior_logits = add(resize_to(*priors.neighbour, semantic), out.prior_logits);
  out.reverse_mask = stack_channels(one_minus(sigmoid(out.prior_logits)), semantic_ch_);
  const Tensor edge = resize_to(priors.edge, semantic);
  const Tensor fused = concat_channels({edge, mul(out.reverse_mask, semantic)});
  out.prediction = conv2d(conv_block(fused, fuse_), head_);
  return out;
}

ErrNet::ErrNet(const ErrNetConfig& config, std::uint64_t seed)
    : config_(config),
      rng_(seed),
      encoder_(store_, config.encoder, rng_),
      aspp_(store_, config.encoder.channels[4], config.aspp_mid_channels, rng_),
      sea_(store_, config.encoder.channels[0], config.encoder.channels[1], rng_),
      rru5_(store_, 5, config.encoder.channels[4], rng_),
      rru4_(store_, 4, config.encoder.channels[3], rng_),
      rru3_(store_, 3, config.encoder.channels[2], rng_) {
  if (config.aspp_mid_channels == 0) throw std::invalid_argument("aspp.mid_channels must be at least 1");
}

const Rru& ErrNet::rru(int level) const {
  switch (level) {
    case 3: return rru3_;
    case 4: return rru4_;
    case 5: return rru5_;
    default: throw std::invalid_argument("RRU level must be 3, 4 or 5");
  }
}

PredictionSet ErrNet::forward(const Tensor& image) const {
  const FeaturePyramid fp = encoder_.forward(image);
  PredictionSet ps;
  ps.p_g = aspp_.forward(fp.e(5));
  SeaOutput sea = sea_.forward(fp.e(1), fp.e(2));
  ps.f_e = sea.edge_features;
  ps.p_e = sea.edge_logits;

  ps.rru[2] = rru5_.forward({std::nullopt, ps.p_g, ps.f_e, fp.e(5)});
  ps.p_5 = ps.rru[2].prediction;
  ps.rru[1] = rru4_.forward({ps.p_5, ps.p_g, ps.f_e, fp.e(4)});
  ps.p_4 = ps.rru[1].prediction;
  ps.rru[0] = rru3_.forward({ps.p_4, ps.p_g, ps.f_e, fp.e(3)});
  ps.p_3 = ps.rru[0].prediction;
  return ps;
}

Tensor final_prediction(const PredictionSet& ps, std::size_t out_h, std::size_t out_w) {
  return sigmoid(bilinear_resize(ps.p_3, out_h, out_w));
}

}  // namespace errnet
