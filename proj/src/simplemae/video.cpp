// SPDX-License-Identifier: Apache-2.0
#include "mae4d/simplemae/video.hpp"

#include <stdexcept>
#include <string>

#include "mae4d/numcore/ops.hpp"

namespace mae4d::simplemae {

namespace nc = numcore;

void check_divisible(const Extent3& extent, const Extent3& patch, const char* what) {
  if (patch.t == 0 || patch.h == 0 || patch.w == 0 || extent.t % patch.t || extent.h % patch.h ||
      extent.w % patch.w) {
    throw std::invalid_argument(std::string(what) + ": extent " + std::to_string(extent.t) + "x" +
                                std::to_string(extent.h) + "x" + std::to_string(extent.w) +
                                " is not divisible by patch " + std::to_string(patch.t) + "x" +
                                std::to_string(patch.h) + "x" + std::to_string(patch.w));
  }
}

namespace {

Extent3 clip_extent(const nc::Shape& s) {
  if (s.size() != 4 || s[3] != 3) throw nc::ShapeError("patchify: expected [T,H,W,3] frames, got " + nc::to_string(s));
  return {s[0], s[1], s[2]};
}

nc::Shape split_shape(const Extent3& e, const Extent3& p) {
  return {e.t / p.t, p.t, e.h / p.h, p.h, e.w / p.w, p.w, 3};
}

const std::vector<std::size_t> kToTokens{0, 2, 4, 1, 3, 5, 6};
const std::vector<std::size_t> kToFrames{0, 3, 1, 4, 2, 5, 6};

nc::Shape token_shape(const nc::Shape& s, const Extent3& grid, const Extent3& patch) {
  if (s.size() != 2 || s[0] != grid.volume() || s[1] != patch.volume() * 3) {
    throw nc::ShapeError("unpatchify: tokens " + nc::to_string(s) + " do not match grid/patch");
  }
  return {grid.t, grid.h, grid.w, patch.t, patch.h, patch.w, 3};
}

}  // namespace

Array patchify(const Array& frames, const Extent3& patch) {
  const Extent3 e = clip_extent(frames.shape());
  check_divisible(e, patch, "patchify");
  const Array tokens = nc::permute(frames.reshaped(split_shape(e, patch)), kToTokens);
  return tokens.reshaped({(e.t / patch.t) * (e.h / patch.h) * (e.w / patch.w), patch.volume() * 3});
}

Var patchify(const Var& frames, const Extent3& patch) {
  const Extent3 e = clip_extent(frames.shape());
  check_divisible(e, patch, "patchify");
  const Var tokens = nc::permute(nc::reshape(frames, split_shape(e, patch)), kToTokens);
  return nc::reshape(tokens, {(e.t / patch.t) * (e.h / patch.h) * (e.w / patch.w), patch.volume() * 3});
}

Array unpatchify(const Array& tokens, const Extent3& grid, const Extent3& patch) {
  const Array blocks = nc::permute(tokens.reshaped(token_shape(tokens.shape(), grid, patch)), kToFrames);
  return blocks.reshaped({grid.t * patch.t, grid.h * patch.h, grid.w * patch.w, 3});
}

Var unpatchify(const Var& tokens, const Extent3& grid, const Extent3& patch) {
  const Var blocks = nc::permute(nc::reshape(tokens, token_shape(tokens.shape(), grid, patch)), kToFrames);
  return nc::reshape(blocks, {grid.t * patch.t, grid.h * patch.h, grid.w * patch.w, 3});
}

}  // namespace mae4d::simplemae
