#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nfuse/encoders/init.hpp"
#include "nfuse/numerics/ops.hpp"
#include "nfuse/numerics/params.hpp"

namespace nfuse {

struct ViTConfig {
  std::size_t n_rois = 16;
  std::size_t patch_volume = 512;  // p^3, the flattened patch width
  std::size_t d = 128;
  std::size_t n_layers = 6;
  std::size_t n_heads = 8;  // d must divide evenly: d_k = d / n_heads
  std::size_t d_mlp = 512;
  std::size_t n_classes = 2;
};

namespace ops_detail {

// Contiguous copy of columns [c0, c0+w) -- per-head views of packed Q/K/V.
template <class T>
TensorT<T> slice_cols(const TensorT<T>& m, std::size_t c0, std::size_t w) {
  const std::size_t rows = m.extent(0), cols = m.extent(1);
  TensorT<T> out({rows, w});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < w; ++c) out(r, c) = m.data()[r * cols + c0 + c];
  return out;
}

template <class T>
void add_cols(TensorT<T>& dst, const TensorT<T>& src, std::size_t c0) {
  const std::size_t rows = dst.extent(0), cols = dst.extent(1), w = src.extent(1);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < w; ++c) dst.data()[r * cols + c0 + c] += src(r, c);
}

}  // namespace ops_detail

// Pre-norm transformer encoder over the CLS + ROI token sequence. The final
// representation concatenates every token, not just CLS.
template <class T>
class ViT {
 public:
  struct BlockParams {
    Param<T>*ln1_g, *ln1_b, *wq, *wk, *wv, *wo, *ln2_g, *ln2_b, *w1, *w2;
  };

  struct BlockCache {
    TensorT<T> x;                    // block input, (N+1) x d
    ops::LayerNormCache<T> ln1;
    TensorT<T> a;                    // LN1 output
    TensorT<T> q, k, v;              // packed heads, (N+1) x d
    std::vector<TensorT<T>> probs;   // per head, (N+1) x (N+1)
    TensorT<T> concat;               // head outputs before W_O
    TensorT<T> zprime;               // x + attention
    ops::LayerNormCache<T> ln2;
    TensorT<T> b;                    // LN2 output
    TensorT<T> hidden;               // pre-GELU, (N+1) x d_mlp
    TensorT<T> hact;                 // post-GELU
  };

  struct Cache {
    TensorT<T> patches;  // N x P
    TensorT<T> z0;
    std::vector<BlockCache> blocks;
    TensorT<T> zfinal;   // 1 x (N+1)*d
  };

  ViT(const ViTConfig& cfg, ParamSet<T>& params, std::uint64_t init_seed)
      : cfg_(cfg), params_(&params) {
    if (cfg.d % cfg.n_heads != 0)
      throw std::invalid_argument("vit: d must be divisible by the head count");
    auto rng = make_rng(init_seed, 0x5617);
    embed_w_ = &params.add("vit.embed.w", {cfg.d, cfg.patch_volume});
    init_glorot(embed_w_->value, cfg.d, cfg.patch_volume, rng);
    embed_b_ = &params.add("vit.embed.b", {cfg.d});
    cls_ = &params.add("vit.cls", {std::size_t(1), cfg.d});
    init_scaled_normal(cls_->value, cfg.d, rng);
    pos_ = &params.add("vit.pos", {cfg.n_rois + 1, cfg.d});
    init_scaled_normal(pos_->value, cfg.d, rng);
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
      const std::string p = "vit.block" + std::to_string(l) + ".";
      BlockParams bp;
      bp.ln1_g = &params.add(p + "ln1.g", {cfg.d});
      bp.ln1_g->value.fill(T(1));
      bp.ln1_b = &params.add(p + "ln1.b", {cfg.d});
      bp.wq = &params.add(p + "wq", {cfg.d, cfg.d});
      bp.wk = &params.add(p + "wk", {cfg.d, cfg.d});
      bp.wv = &params.add(p + "wv", {cfg.d, cfg.d});
      bp.wo = &params.add(p + "wo", {cfg.d, cfg.d});
      for (Param<T>* w : {bp.wq, bp.wk, bp.wv, bp.wo}) init_glorot(w->value, cfg.d, cfg.d, rng);
      bp.ln2_g = &params.add(p + "ln2.g", {cfg.d});
      bp.ln2_g->value.fill(T(1));
      bp.ln2_b = &params.add(p + "ln2.b", {cfg.d});
      bp.w1 = &params.add(p + "mlp.w1", {cfg.d_mlp, cfg.d});
      init_glorot(bp.w1->value, cfg.d_mlp, cfg.d, rng);
      bp.w2 = &params.add(p + "mlp.w2", {cfg.d, cfg.d_mlp});
      init_glorot(bp.w2->value, cfg.d, cfg.d_mlp, rng);
      blocks_.push_back(bp);
    }
    const std::size_t final_len = (cfg.n_rois + 1) * cfg.d;
    head_w_ = &params.add("vit.head.w", {cfg.n_classes, final_len});
    init_glorot(head_w_->value, cfg.n_classes, final_len, rng);
    head_b_ = &params.add("vit.head.b", {cfg.n_classes});
  }

  const ViTConfig& config() const { return cfg_; }

  // Flatten + project each patch, prepend CLS, add positions. (N+1) x d.
  TensorT<T> embed_patches(const TensorT<T>& patches) const {
    if (patches.extent(0) != cfg_.n_rois || patches.cols() != cfg_.patch_volume)
      throw std::invalid_argument("vit: patch set shape mismatch, want " +
                                  std::to_string(cfg_.n_rois) + " x " +
                                  std::to_string(cfg_.patch_volume));
    TensorT<T> flat({cfg_.n_rois, cfg_.patch_volume}, patches.vec());
    const TensorT<T> proj = ops::linear(flat, embed_w_->value, &embed_b_->value);
    TensorT<T> z0({cfg_.n_rois + 1, cfg_.d});
    for (std::size_t c = 0; c < cfg_.d; ++c) z0(0, c) = cls_->value[c] + pos_->value(0, c);
    for (std::size_t r = 0; r < cfg_.n_rois; ++r)
      for (std::size_t c = 0; c < cfg_.d; ++c) z0(r + 1, c) = proj(r, c) + pos_->value(r + 1, c);
    return z0;
  }

  TensorT<T> encode(const TensorT<T>& z0, Cache* cache) const {
    TensorT<T> z = z0;
    if (cache) cache->blocks.resize(cfg_.n_layers);
    for (std::size_t l = 0; l < cfg_.n_layers; ++l)
      z = block_forward(l, z, cache ? &cache->blocks[l] : nullptr);
    return z;
  }

  // [CLS || ROI_1 || ... || ROI_N]; row-major flatten of Z_L.
  TensorT<T> final_representation(const TensorT<T>& zl) const {
    return TensorT<T>({std::size_t(1), zl.size()}, zl.vec());
  }

  TensorT<T> classify_logits(const TensorT<T>& zfinal) const {
    return ops::linear(zfinal, head_w_->value, &head_b_->value);
  }

  TensorT<T> classify_probs(const TensorT<T>& zfinal) const {
    return ops::softmax(classify_logits(zfinal), -1);
  }

  TensorT<T> forward_logits(const TensorT<T>& patches, Cache* cache) const {
    if (cache) cache->patches = TensorT<T>({cfg_.n_rois, cfg_.patch_volume}, patches.vec());
    TensorT<T> z0 = embed_patches(patches);
    if (cache) cache->z0 = z0;
    const TensorT<T> zl = encode(z0, cache);
    TensorT<T> zf = final_representation(zl);
    if (cache) cache->zfinal = zf;
    return classify_logits(zf);
  }

  // Accumulates parameter gradients from d(logits); needs the forward cache.
  void backward_logits(const TensorT<T>& dlogits, const Cache& cache) {
    TensorT<T> dzf({std::size_t(1), cache.zfinal.size()});
    ops::linear_backward(cache.zfinal, head_w_->value, dlogits, &dzf, head_w_->grad,
                         &head_b_->grad);
    TensorT<T> dz({cfg_.n_rois + 1, cfg_.d}, dzf.vec());
    for (std::size_t l = cfg_.n_layers; l-- > 0;) dz = block_backward(l, dz, cache.blocks[l]);
    // embedding backward: dz0 = dz
    for (std::size_t c = 0; c < cfg_.d; ++c) cls_->grad[c] += dz(0, c);
    for (std::size_t r = 0; r < cfg_.n_rois + 1; ++r)
      for (std::size_t c = 0; c < cfg_.d; ++c) pos_->grad(r, c) += dz(r, c);
    TensorT<T> drows({cfg_.n_rois, cfg_.d});
    for (std::size_t r = 0; r < cfg_.n_rois; ++r)
      for (std::size_t c = 0; c < cfg_.d; ++c) drows(r, c) = dz(r + 1, c);
    ops::linear_backward(cache.patches, embed_w_->value, drows, static_cast<TensorT<T>*>(nullptr),
                         embed_w_->grad, &embed_b_->grad);
  }

  // Encoder output without CLS, in atlas ROI order; input to the structural
  // graph construction.
  TensorT<T> roi_embeddings(const TensorT<T>& patches) const {
    const TensorT<T> zl = encode(embed_patches(patches), nullptr);
    TensorT<T> out({cfg_.n_rois, cfg_.d});
    for (std::size_t r = 0; r < cfg_.n_rois; ++r)
      for (std::size_t c = 0; c < cfg_.d; ++c) out(r, c) = zl(r + 1, c);
    return out;
  }

  // Exposed for block-level tests and gradient checks.
  TensorT<T> block_forward(std::size_t l, const TensorT<T>& x, BlockCache* c) const {
    const BlockParams& bp = blocks_[l];
    const std::size_t dk = cfg_.d / cfg_.n_heads;
    ops::LayerNormCache<T> ln1;
    const TensorT<T> a = ops::layer_norm(x, bp.ln1_g->value, bp.ln1_b->value, ln_eps(), &ln1);
    const TensorT<T> q = ops::linear(a, bp.wq->value);
    const TensorT<T> k = ops::linear(a, bp.wk->value);
    const TensorT<T> v = ops::linear(a, bp.wv->value);
    TensorT<T> concat({x.extent(0), cfg_.d});
    std::vector<TensorT<T>> probs(cfg_.n_heads);
    const T inv_sqrt_dk = T(1) / std::sqrt(static_cast<T>(dk));
    for (std::size_t h = 0; h < cfg_.n_heads; ++h) {
      const TensorT<T> qh = ops_detail::slice_cols(q, h * dk, dk);
      const TensorT<T> kh = ops_detail::slice_cols(k, h * dk, dk);
      const TensorT<T> vh = ops_detail::slice_cols(v, h * dk, dk);
      TensorT<T> scores({x.extent(0), x.extent(0)});
      kern::gemm_nt(x.extent(0), x.extent(0), dk, qh.data(), kh.data(), scores.data(), false);
      kern::scale(scores.size(), inv_sqrt_dk, scores.data());
      probs[h] = ops::softmax(scores, -1);
      TensorT<T> oh({x.extent(0), dk});
      kern::gemm_nn(x.extent(0), dk, x.extent(0), probs[h].data(), vh.data(), oh.data(), false);
      ops_detail::add_cols(concat, oh, h * dk);
    }
    const TensorT<T> attn = ops::linear(concat, bp.wo->value);
    TensorT<T> zprime = x;
    kern::axpy(zprime.size(), T(1), attn.data(), zprime.data());
    ops::LayerNormCache<T> ln2;
    const TensorT<T> b = ops::layer_norm(zprime, bp.ln2_g->value, bp.ln2_b->value, ln_eps(), &ln2);
    const TensorT<T> hidden = ops::linear(b, bp.w1->value);
    const TensorT<T> hact = ops::gelu(hidden);
    const TensorT<T> mlp_out = ops::linear(hact, bp.w2->value);
    TensorT<T> out = zprime;
    kern::axpy(out.size(), T(1), mlp_out.data(), out.data());
    if (c) {
      c->x = x;
      c->ln1 = std::move(ln1);
      c->a = a;
      c->q = q;
      c->k = k;
      c->v = v;
      c->probs = std::move(probs);
      c->concat = concat;
      c->zprime = zprime;
      c->ln2 = std::move(ln2);
      c->b = b;
      c->hidden = hidden;
      c->hact = hact;
    }
    return out;
  }

  TensorT<T> block_backward(std::size_t l, const TensorT<T>& dout, const BlockCache& c) {
    const BlockParams& bp = blocks_[l];
    const std::size_t dk = cfg_.d / cfg_.n_heads;
    const std::size_t rows = c.x.extent(0);

    // MLP branch: out = zprime + W2(gelu(W1 LN2(zprime)))
    TensorT<T> dhact({rows, cfg_.d_mlp});
    ops::linear_backward(c.hact, bp.w2->value, dout, &dhact, bp.w2->grad);
    const TensorT<T> dhidden = ops::gelu_backward(c.hidden, dhact);
    TensorT<T> db({rows, cfg_.d});
    ops::linear_backward(c.b, bp.w1->value, dhidden, &db, bp.w1->grad);
    TensorT<T> dzprime =
        ops::layer_norm_backward(db, c.ln2, bp.ln2_g->value, &bp.ln2_g->grad, &bp.ln2_b->grad);
    kern::axpy(dzprime.size(), T(1), dout.data(), dzprime.data());  // residual

    // Attention branch: zprime = x + W_O concat(heads)
    TensorT<T> dconcat({rows, cfg_.d});
    ops::linear_backward(c.concat, bp.wo->value, dzprime, &dconcat, bp.wo->grad);
    TensorT<T> dq({rows, cfg_.d}), dkk({rows, cfg_.d}), dv({rows, cfg_.d});
    const T inv_sqrt_dk = T(1) / std::sqrt(static_cast<T>(dk));
    for (std::size_t h = 0; h < cfg_.n_heads; ++h) {
      const TensorT<T> doh = ops_detail::slice_cols(dconcat, h * dk, dk);
      const TensorT<T> qh = ops_detail::slice_cols(c.q, h * dk, dk);
      const TensorT<T> kh = ops_detail::slice_cols(c.k, h * dk, dk);
      const TensorT<T> vh = ops_detail::slice_cols(c.v, h * dk, dk);
      const TensorT<T>& p = c.probs[h];
      TensorT<T> dp({rows, rows});
      kern::gemm_nt(rows, rows, dk, doh.data(), vh.data(), dp.data(), false);
      TensorT<T> dvh({rows, dk});
      kern::gemm_tn(rows, dk, rows, p.data(), doh.data(), dvh.data(), false);
      TensorT<T> ds = ops::softmax_backward(p, dp, -1);
      kern::scale(ds.size(), inv_sqrt_dk, ds.data());
      TensorT<T> dqh({rows, dk});
      kern::gemm_nn(rows, dk, rows, ds.data(), kh.data(), dqh.data(), false);
      TensorT<T> dkh({rows, dk});
      kern::gemm_tn(rows, dk, rows, ds.data(), qh.data(), dkh.data(), false);
      ops_detail::add_cols(dq, dqh, h * dk);
      ops_detail::add_cols(dkk, dkh, h * dk);
      ops_detail::add_cols(dv, dvh, h * dk);
    }
    TensorT<T> da({rows, cfg_.d});
    ops::linear_backward(c.a, bp.wq->value, dq, &da, bp.wq->grad);
    ops::linear_backward(c.a, bp.wk->value, dkk, &da, bp.wk->grad);
    ops::linear_backward(c.a, bp.wv->value, dv, &da, bp.wv->grad);
    TensorT<T> dx =
        ops::layer_norm_backward(da, c.ln1, bp.ln1_g->value, &bp.ln1_g->grad, &bp.ln1_b->grad);
    kern::axpy(dx.size(), T(1), dzprime.data(), dx.data());  // residual
    return dx;
  }

  static constexpr T ln_eps() { return T(1e-5); }

  const std::vector<BlockParams>& block_params() const { return blocks_; }

 private:
  ViTConfig cfg_;
  ParamSet<T>* params_;
  Param<T>*embed_w_, *embed_b_, *cls_, *pos_;
  std::vector<BlockParams> blocks_;
  Param<T>*head_w_, *head_b_;
};

}  // namespace nfuse
