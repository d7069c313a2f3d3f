/*
 * Copyright 2026 The Consensus Denoising Lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "consensus/autodiff/ops.hpp"

#include <Eigen/Core>

#include <memory>
#include <stdexcept>
#include <string>

namespace consensus::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using OuterStride = Eigen::OuterStride<>;
using StridedMap = Eigen::Map<RowMat, 0, OuterStride>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, OuterStride>;

Tape& common_tape(const Var& a, const Var& b) {
  if (!a.valid() || !b.valid()) throw std::invalid_argument("operand is not bound to a tape");
  if (&a.tape() != &b.tape()) throw std::invalid_argument("operands live on different tapes");
  return a.tape();
}

void require_rank4(const Var& x, const char* op) {
  if (x.shape().size() != 4) {
    throw std::invalid_argument(std::string(op) + ": expected a 4-D NCHW tensor");
  }
}

// Zero-padded copy of one sample laid out [C, (H+2p)*(W+2p) + 2p]. The trailing
// slack lets every kernel offset read a contiguous run of H*(W+2p) values.
struct PaddedLayout {
  std::size_t pad, padded_width, plane, run;
  PaddedLayout(std::size_t height, std::size_t width, std::size_t k)
      : pad(k / 2),
        padded_width(width + 2 * pad),
        plane((height + 2 * pad) * padded_width + 2 * pad),
        run(height * padded_width) {}
  std::size_t offset(std::size_t ki, std::size_t kj) const { return ki * padded_width + kj; }
};

void pad_input(const double* src, std::size_t channels, std::size_t height, std::size_t width,
               const PaddedLayout& lay, double* dst) {
  std::fill(dst, dst + channels * lay.plane, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t y = 0; y < height; ++y) {
      std::copy_n(src + (c * height + y) * width, width,
                  dst + c * lay.plane + (y + lay.pad) * lay.padded_width + lay.pad);
    }
  }
}

// Weight [Cout, Cin, k, k] regrouped as k*k contiguous [Cout, Cin] blocks.
std::vector<double> split_taps(std::span<const double> w, std::size_t cout, std::size_t cin, std::size_t k) {
  const std::size_t taps = k * k;
  std::vector<double> out(w.size());
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t i = 0; i < cin; ++i) {
      for (std::size_t t = 0; t < taps; ++t) out[(t * cout + o) * cin + i] = w[(o * cin + i) * taps + t];
    }
  }
  return out;
}

Var elementwise_binary(const Var& a, const Var& b, double sa, double sb) {
  Tape& tape = common_tape(a, b);
  if (a.shape() != b.shape()) throw std::invalid_argument("elementwise op: shape mismatch");
  const auto av = a.value();
  const auto bv = b.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sa * av[i] + sb * bv[i];
  const std::size_t aid = a.id();
  const std::size_t bid = b.id();
  return tape.record(a.shape(), std::move(out), {aid, bid}, [aid, bid, sa, sb](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    if (t.requires_grad(aid)) {
      auto ga = t.grad_buffer(aid);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += sa * g[i];
    }
    if (t.requires_grad(bid)) {
      auto gb = t.grad_buffer(bid);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += sb * g[i];
    }
  });
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b) {
  Tape& tape = common_tape(x, w);
  common_tape(x, b);
  require_rank4(x, "conv2d");
  const auto& xs = x.shape();
  const auto& ws = w.shape();
  if (ws.size() != 4 || ws[2] != ws[3] || ws[2] % 2 == 0) {
    throw std::invalid_argument("conv2d: weight must be [Cout,Cin,k,k] with odd k");
  }
  if (ws[1] != xs[1]) throw std::invalid_argument("conv2d: input channel mismatch");
  if (b.shape() != Shape{ws[0]}) throw std::invalid_argument("conv2d: bias must be [Cout]");

  const std::size_t batch = xs[0], cin = xs[1], height = xs[2], width = xs[3];
  const std::size_t cout = ws[0], k = ws[2];
  const std::size_t pixels = height * width;
  const PaddedLayout lay(height, width, k);
  const auto eo = static_cast<Eigen::Index>(cout);
  const auto ei = static_cast<Eigen::Index>(cin);
  const auto er = static_cast<Eigen::Index>(lay.run);
  const auto estride = static_cast<Eigen::Index>(lay.plane);

  std::vector<double> out(batch * cout * pixels);
  const std::vector<double> taps = split_taps(w.value(), cout, cin, k);
  std::vector<double> xpad(cin * lay.plane);
  RowMat acc(eo, er);
  const double* xv = x.value().data();
  const auto bv = b.value();
  for (std::size_t n = 0; n < batch; ++n) {
    pad_input(xv + n * cin * pixels, cin, height, width, lay, xpad.data());
    acc.setZero();
    for (std::size_t ki = 0; ki < k; ++ki) {
      for (std::size_t kj = 0; kj < k; ++kj) {
        const std::size_t t = ki * k + kj;
        ConstMapMat wt(taps.data() + t * cout * cin, eo, ei);
        ConstStridedMap xt(xpad.data() + lay.offset(ki, kj), ei, er, OuterStride(estride));
        acc.noalias() += wt * xt;
      }
    }
    double* dst = out.data() + n * cout * pixels;
    for (std::size_t c = 0; c < cout; ++c) {
      for (std::size_t y = 0; y < height; ++y) {
        const double* src = acc.data() + c * lay.run + y * lay.padded_width;
        double* row = dst + c * pixels + y * width;
        for (std::size_t xx = 0; xx < width; ++xx) row[xx] = src[xx] + bv[c];
      }
    }
  }

  const std::size_t xid = x.id(), wid = w.id(), bid = b.id();
  return tape.record(
      {batch, cout, height, width}, std::move(out), {xid, wid, bid},
      [=](Tape& t, std::size_t self) {
        const auto g = t.grad(self);
        const bool need_w = t.requires_grad(wid);
        const bool need_x = t.requires_grad(xid);
        if (t.requires_grad(bid)) {
          auto gb = t.grad_buffer(bid);
          for (std::size_t n = 0; n < batch; ++n) {
            for (std::size_t c = 0; c < cout; ++c) {
              const double* gp = g.data() + (n * cout + c) * pixels;
              double s = 0.0;
              for (std::size_t i = 0; i < pixels; ++i) s += gp[i];
              gb[c] += s;
            }
          }
        }
        if (!need_w && !need_x) return;
        // Output gradient on the padded-width grid; the 2p junk columns stay zero.
        RowMat gpad = RowMat::Zero(eo, er);
        std::vector<double> xpad(need_w ? cin * lay.plane : 0);
        std::vector<double> gxpad(need_x ? cin * lay.plane : 0);
        std::vector<double> gtaps(need_w ? cout * cin * k * k : 0, 0.0);
        const std::vector<double> wtaps = need_x ? split_taps(t.value(wid), cout, cin, k) : std::vector<double>{};
        const double* xv = t.value(xid).data();
        for (std::size_t n = 0; n < batch; ++n) {
          for (std::size_t c = 0; c < cout; ++c) {
            for (std::size_t y = 0; y < height; ++y) {
              std::copy_n(g.data() + (n * cout + c) * pixels + y * width, width,
                          gpad.data() + c * lay.run + y * lay.padded_width);
            }
          }
          if (need_w) pad_input(xv + n * cin * pixels, cin, height, width, lay, xpad.data());
          if (need_x) std::fill(gxpad.begin(), gxpad.end(), 0.0);
          for (std::size_t ki = 0; ki < k; ++ki) {
            for (std::size_t kj = 0; kj < k; ++kj) {
              const std::size_t tap = ki * k + kj;
              const std::size_t off = lay.offset(ki, kj);
              if (need_w) {
                MapMat gw(gtaps.data() + tap * cout * cin, eo, ei);
                gw.noalias() += gpad * ConstStridedMap(xpad.data() + off, ei, er, OuterStride(estride)).transpose();
              }
              if (need_x) {
                StridedMap gx(gxpad.data() + off, ei, er, OuterStride(estride));
                gx.noalias() += ConstMapMat(wtaps.data() + tap * cout * cin, eo, ei).transpose() * gpad;
              }
            }
          }
          if (need_x) {
            auto gx = t.grad_buffer(xid);
            for (std::size_t c = 0; c < cin; ++c) {
              for (std::size_t y = 0; y < height; ++y) {
                const double* src = gxpad.data() + c * lay.plane + (y + lay.pad) * lay.padded_width + lay.pad;
                double* dst = gx.data() + (n * cin + c) * pixels + y * width;
                for (std::size_t xx = 0; xx < width; ++xx) dst[xx] += src[xx];
              }
            }
          }
        }
        if (need_w) {
          auto gw = t.grad_buffer(wid);
          const std::size_t ntaps = k * k;
          for (std::size_t o = 0; o < cout; ++o) {
            for (std::size_t i = 0; i < cin; ++i) {
              for (std::size_t tap = 0; tap < ntaps; ++tap) {
                gw[(o * cin + i) * ntaps + tap] += gtaps[(tap * cout + o) * cin + i];
              }
            }
          }
        }
      });
}

Var relu(const Var& x) {
  const auto xv = x.value();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  const std::size_t xid = x.id();
  return x.tape().record(x.shape(), std::move(out), {xid}, [xid](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto xv = t.value(xid);
    auto gx = t.grad_buffer(xid);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += g[i];
    }
  });
}

Var downsample2(const Var& x) {
  require_rank4(x, "downsample2");
  const auto& s = x.shape();
  if (s[2] % 2 != 0 || s[3] % 2 != 0) {
    throw std::invalid_argument("downsample2: height and width must be even");
  }
  const std::size_t planes = s[0] * s[1], h = s[2], w = s[3], oh = h / 2, ow = w / 2;
  const auto xv = x.value();
  std::vector<double> out(planes * oh * ow);
  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = xv.data() + p * h * w;
    double* dst = out.data() + p * oh * ow;
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const double* a = src + (2 * i) * w + 2 * j;
        dst[i * ow + j] = 0.25 * (a[0] + a[1] + a[w] + a[w + 1]);
      }
    }
  }
  const std::size_t xid = x.id();
  return x.tape().record({s[0], s[1], oh, ow}, std::move(out), {xid},
                         [=](Tape& t, std::size_t self) {
                           const auto g = t.grad(self);
                           auto gx = t.grad_buffer(xid);
                           for (std::size_t p = 0; p < planes; ++p) {
                             for (std::size_t i = 0; i < oh; ++i) {
                               for (std::size_t j = 0; j < ow; ++j) {
                                 const double v = 0.25 * g[(p * oh + i) * ow + j];
                                 double* a = gx.data() + p * h * w + (2 * i) * w + 2 * j;
                                 a[0] += v;
                                 a[1] += v;
                                 a[w] += v;
                                 a[w + 1] += v;
                               }
                             }
                           }
                         });
}

Var max_pool2(const Var& x) {
  require_rank4(x, "max_pool2");
  const auto& s = x.shape();
  if (s[2] % 2 != 0 || s[3] % 2 != 0) {
    throw std::invalid_argument("max_pool2: height and width must be even");
  }
  const std::size_t planes = s[0] * s[1], h = s[2], w = s[3], oh = h / 2, ow = w / 2;
  const auto xv = x.value();
  std::vector<double> out(planes * oh * ow);
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const std::size_t base = p * h * w + (2 * i) * w + 2 * j;
        std::size_t best = base;
        for (std::size_t cand : {base + 1, base + w, base + w + 1}) {
          if (xv[cand] > xv[best]) best = cand;
        }
        const std::size_t o = (p * oh + i) * ow + j;
        out[o] = xv[best];
        (*argmax)[o] = best;
      }
    }
  }
  const std::size_t xid = x.id();
  return x.tape().record({s[0], s[1], oh, ow}, std::move(out), {xid},
                         [xid, argmax](Tape& t, std::size_t self) {
                           const auto g = t.grad(self);
                           auto gx = t.grad_buffer(xid);
                           for (std::size_t o = 0; o < g.size(); ++o) gx[(*argmax)[o]] += g[o];
                         });
}

Var pool2(const Var& x, PoolMode mode) {
  return mode == PoolMode::kMax ? max_pool2(x) : downsample2(x);
}

Var upsample2(const Var& x) {
  require_rank4(x, "upsample2");
  const auto& s = x.shape();
  const std::size_t planes = s[0] * s[1], h = s[2], w = s[3], oh = 2 * h, ow = 2 * w;
  const auto xv = x.value();
  std::vector<double> out(planes * oh * ow);
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t i = 0; i < oh; ++i) {
      const double* src = xv.data() + p * h * w + (i / 2) * w;
      double* dst = out.data() + (p * oh + i) * ow;
      for (std::size_t j = 0; j < ow; ++j) dst[j] = src[j / 2];
    }
  }
  const std::size_t xid = x.id();
  return x.tape().record({s[0], s[1], oh, ow}, std::move(out), {xid},
                         [=](Tape& t, std::size_t self) {
                           const auto g = t.grad(self);
                           auto gx = t.grad_buffer(xid);
                           for (std::size_t p = 0; p < planes; ++p) {
                             for (std::size_t i = 0; i < oh; ++i) {
                               const double* src = g.data() + (p * oh + i) * ow;
                               double* dst = gx.data() + p * h * w + (i / 2) * w;
                               for (std::size_t j = 0; j < ow; ++j) dst[j / 2] += src[j];
                             }
                           }
                         });
}

Var concat_channels(const Var& a, const Var& b) {
  Tape& tape = common_tape(a, b);
  require_rank4(a, "concat_channels");
  require_rank4(b, "concat_channels");
  const auto& as = a.shape();
  const auto& bs = b.shape();
  if (as[0] != bs[0] || as[2] != bs[2] || as[3] != bs[3]) {
    throw std::invalid_argument("concat_channels: batch/spatial shape mismatch");
  }
  const std::size_t batch = as[0], ca = as[1], cb = bs[1], pixels = as[2] * as[3];
  const auto av = a.value();
  const auto bv = b.value();
  std::vector<double> out(batch * (ca + cb) * pixels);
  for (std::size_t n = 0; n < batch; ++n) {
    double* dst = out.data() + n * (ca + cb) * pixels;
    std::copy_n(av.data() + n * ca * pixels, ca * pixels, dst);
    std::copy_n(bv.data() + n * cb * pixels, cb * pixels, dst + ca * pixels);
  }
  const std::size_t aid = a.id(), bid = b.id();
  return tape.record({batch, ca + cb, as[2], as[3]}, std::move(out), {aid, bid},
                     [=](Tape& t, std::size_t self) {
                       const auto g = t.grad(self);
                       for (std::size_t n = 0; n < batch; ++n) {
                         const double* src = g.data() + n * (ca + cb) * pixels;
                         if (t.requires_grad(aid)) {
                           double* ga = t.grad_buffer(aid).data() + n * ca * pixels;
                           for (std::size_t i = 0; i < ca * pixels; ++i) ga[i] += src[i];
                         }
                         if (t.requires_grad(bid)) {
                           double* gb = t.grad_buffer(bid).data() + n * cb * pixels;
                           for (std::size_t i = 0; i < cb * pixels; ++i) gb[i] += src[ca * pixels + i];
                         }
                       }
                     });
}

Var sq_norm(const Var& x) {
  const auto xv = x.value();
  double total = 0.0;
  for (double v : xv) total += v * v;
  const std::size_t xid = x.id();
  return x.tape().record({1}, {total}, {xid}, [xid](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    const auto xv = t.value(xid);
    auto gx = t.grad_buffer(xid);
    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += 2.0 * xv[i] * g;
  });
}

Var add(const Var& a, const Var& b) { return elementwise_binary(a, b, 1.0, 1.0); }
Var sub(const Var& a, const Var& b) { return elementwise_binary(a, b, 1.0, -1.0); }

Var mul(const Var& a, const Var& b) {
  Tape& tape = common_tape(a, b);
  if (a.shape() != b.shape()) throw std::invalid_argument("mul: shape mismatch");
  const auto av = a.value();
  const auto bv = b.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const std::size_t aid = a.id(), bid = b.id();
  return tape.record(a.shape(), std::move(out), {aid, bid}, [aid, bid](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto av = t.value(aid);
    const auto bv = t.value(bid);
    if (t.requires_grad(aid)) {
      auto ga = t.grad_buffer(aid);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(bid)) {
      auto gb = t.grad_buffer(bid);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(const Var& x, double alpha) {
  const auto xv = x.value();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * xv[i];
  const std::size_t xid = x.id();
  return x.tape().record(x.shape(), std::move(out), {xid}, [xid, alpha](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    auto gx = t.grad_buffer(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += alpha * g[i];
  });
}

}  // namespace consensus::ad
