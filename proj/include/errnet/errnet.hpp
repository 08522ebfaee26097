#ifndef ERRNET_ERRNET_HPP_
#define ERRNET_ERRNET_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>

#include "errnet/encoder.hpp"
#include "errnet/ops.hpp"
#include "errnet/parameters.hpp"
#include "errnet/tensor.hpp"

namespace errnet {

inline constexpr std::array<std::size_t, 4> kAsppDilations{1, 6, 12, 18};
inline constexpr std::size_t kEdgeChannels = 64;
inline constexpr std::size_t kRruMidChannels = 64;

struct ErrNetConfig {
  EncoderConfig encoder;
  std::size_t aspp_mid_channels = 64;
};

/// Global-prior head on e5: four dilated branches concatenated with e5, one
/// conv block, then a 1x1 projection to a single logit channel.
class Aspp {
 public:
  Aspp(ParameterStore& store, std::size_t in_ch, std::size_t mid_ch, std::mt19937_64& rng);

  Tensor forward(const Tensor& e5) const;
  /// Output of the atrous conv block for kAsppDilations[index].
  Tensor branch(std::size_t index, const Tensor& e5) const;
  const Conv2dParams& branch_params(std::size_t index) const { return branches_.at(index); }

 private:
  std::array<Conv2dParams, 4> branches_;
  Conv2dParams fuse_, head_;
};

struct SeaOutput {
  Tensor edge_features;  // f_e, 64 channels at stride 4
  Tensor edge_logits;    // p_e
  Tensor switcher;       // w^s
};

/// Selective edge aggregation of e1 and e2.
class Sea {
 public:
  Sea(ParameterStore& store, std::size_t c1, std::size_t c2, std::mt19937_64& rng);
  SeaOutput forward(const Tensor& e1, const Tensor& e2) const;

 private:
  Conv2dParams reduce1_, reduce2_, switch_, residual1_, residual2_, fuse_, edge_head_;
};

/// The four re-calibration inputs for one RRU level.
struct NgesPriors {
  std::optional<Tensor> neighbour;  // p_{i+1}; absent exactly at level 5
  Tensor global;                    // p_g
  Tensor edge;                      // f_e
  Tensor semantic;                  // e_i
};

struct RruOutput {
  Tensor prediction;      // p_i
  Tensor prior_logits;    // resized (p_{i+1} + p_g) or p_g, single channel
  Tensor reverse_mask;    // stacked 1 - sigmoid(prior_logits)
};

/// Reversible re-calibration unit at level 3, 4 or 5.
class Rru {
 public:
  Rru(ParameterStore& store, int level, std::size_t semantic_ch, std::mt19937_64& rng);
  RruOutput forward(const NgesPriors& priors) const;
  int level() const { return level_; }

 private:
  int level_;
  std::size_t semantic_ch_;
  Conv2dParams fuse_, head_;
};

struct PredictionSet {
  Tensor p_g, p_5, p_4, p_3;  // mask logits
  Tensor p_e;                 // edge logits
  Tensor f_e;                 // edge features
  std::array<RruOutput, 3> rru;  // levels 3, 4, 5 at index 0, 1, 2

  const RruOutput& level(int i) const { return rru.at(static_cast<std::size_t>(i - 3)); }
};

class ErrNet {
 public:
  ErrNet(const ErrNetConfig& config, std::uint64_t seed);

  ErrNet(const ErrNet&) = delete;
  ErrNet& operator=(const ErrNet&) = delete;

  /// encoder -> ASPP -> SEA -> RRU5 -> RRU4 -> RRU3.
  PredictionSet forward(const Tensor& image) const;

  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }
  const ErrNetConfig& config() const { return config_; }

  const Encoder& encoder() const { return encoder_; }
  const Aspp& aspp() const { return aspp_; }
  const Sea& sea() const { return sea_; }
  const Rru& rru(int level) const;

 private:
  ErrNetConfig config_;
  ParameterStore store_;
  std::mt19937_64 rng_;
  Encoder encoder_;
  Aspp aspp_;
  Sea sea_;
  Rru rru5_, rru4_, rru3_;
};

/// sigmoid(resize(p_3)) at the requested resolution.
Tensor final_prediction(const PredictionSet& ps, std::size_t out_h, std::size_t out_w);

}  // namespace errnet

#endif  // ERRNET_ERRNET_HPP_
