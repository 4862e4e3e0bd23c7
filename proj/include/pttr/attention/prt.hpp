#pragma once

#include <string>
#include <vector>

#include "pttr/attention/ram.hpp"

namespace pttr {

/// One matching stage: a self-attention module applied to both clouds with
/// shared storage, followed by search-to-template cross-attention.
template <typename Scalar>
struct PrtBlock {
  RamWeights<Scalar> self_ram;
  RamWeights<Scalar> cross_ram;

  PrtBlock() = default;
  PrtBlock(const std::string& name, Index channels, RandomState& rng)
      : self_ram(name + ".self", channels, rng), cross_ram(name + ".cross", channels, rng) {}

  void collect(ParameterList<Scalar>& params) const {
    self_ram.collect(params);
    cross_ram.collect(params);
  }
};

template <typename Scalar>
struct PrtWeights {
  std::vector<PrtBlock<Scalar>> blocks;
  RamOptions options;

  PrtWeights() = default;
  PrtWeights(const std::string& name, Index channels, int depth, RamOptions opts, RandomState& rng)
      : options(opts) {
    if (depth < 1) throw ConfigError("prt depth must be >= 1");
    for (int d = 0; d < depth; ++d) {
      blocks.emplace_back(depth == 1 ? name : name + "." + std::to_string(d), channels, rng);
    }
  }

  Index channels() const { return blocks.front().self_ram.channels(); }

  void collect(ParameterList<Scalar>& params) const {
    for (const auto& b : blocks) b.collect(params);
  }
};

template <typename Scalar>
struct PrtOutput {
  Tensor<Scalar> matched;       // Ns x C
  Tensor<Scalar> enh_search;    // Ns x C
  Tensor<Scalar> enh_template;  // Nt x C
};

/// Self-attention on each cloud with the shared module, then cross-attention
/// with the enhanced search as query and the enhanced template as key/value.
/// With several blocks the matched features feed the next block's search side.
template <typename Scalar>
PrtOutput<Scalar> prt_forward(const Tensor<Scalar>& search_feat, const Tensor<Scalar>& template_feat,
                              const PrtWeights<Scalar>& w) {
  if (search_feat.cols() != template_feat.cols()) {
    throw DimensionError("prt_forward: search width " + std::to_string(search_feat.cols()) +
                         " differs from template width " + std::to_string(template_feat.cols()));
  }
  Tensor<Scalar> search = search_feat;
  Tensor<Scalar> templ = template_feat;
  PrtOutput<Scalar> out;
  for (const auto& block : w.blocks) {
    out.enh_search = ram_attend(search, search, search, block.self_ram, w.options);
    out.enh_template = ram_attend(templ, templ, templ, block.self_ram, w.options);
    out.matched = ram_attend(out.enh_search, out.enh_template, out.enh_template, block.cross_ram, w.options);
    search = out.matched;
    templ = out.enh_template;
  }
  return out;
}

}  // namespace pttr
