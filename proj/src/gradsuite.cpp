#include "ssdm/gradsuite.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "ssdm/attention.hpp"
#include "ssdm/ops.hpp"
#include "ssdm/segnet.hpp"
#include "ssdm/semm.hpp"
#include "ssdm/smm.hpp"

namespace ssdm {

namespace {

using D = Tensor<double>;

// Scalar loss with non-uniform weights so gradients are informative.
D weighted_sum(const D& x, Rng& rng) {
  Rng r = rng.fork("loss_weights");
  D weights = uniform_tensor<double>(x.shape(), r, 0.25, 1.75);
  return sum(mul(x, weights));
}

struct CaseRunner {
  uint64_t seed;
  int instances;
  std::vector<GradCheckCase>& out;

  // fn builds parameters and returns the loss closure for one instance.
  void run(const std::string& name,
           const std::function<std::pair<std::function<D()>, std::vector<D>>(Rng&)>&
               make_instance,
           double tol = 1e-4) {
    GradCheckCase result;
    result.name = name;
    result.tol = tol;
    result.instances = instances;
    for (int inst = 0; inst < instances; ++inst) {
      Rng rng(seed, name);
      rng = rng.fork(static_cast<uint64_t>(inst));
      auto [loss_fn, params] = make_instance(rng);
      const GradCheckReport report = grad_check(loss_fn, params);
      result.coords += report.coords_checked;
      if (!report.finite) {
        result.max_rel_err = std::numeric_limits<double>::infinity();
        break;
      }
      result.max_rel_err = std::max(result.max_rel_err, report.max_rel_err);
    }
    result.pass = result.max_rel_err <= tol;
    out.push_back(std::move(result));
  }
};

D randn(Shape shape, Rng& rng, const char* name) {
  Rng r = rng.fork(name);
  return normal_tensor<double>(std::move(shape), r, 0.0, 1.0, true);
}

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite(uint64_t seed, int instances) {
  std::vector<GradCheckCase> results;
  CaseRunner runner{seed, instances, results};

  runner.run("matmul", [](Rng& rng) {
    D a = randn({3, 4}, rng, "a");
    D b = randn({4, 2}, rng, "b");
    auto loss = [=, &rng]() mutable { return weighted_sum(matmul(a, b), rng); };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{a, b});
  });

  runner.run("softmax_lastdim", [](Rng& rng) {
    D x = randn({2, 5}, rng, "x");
    auto loss = [=, &rng]() mutable { return weighted_sum(softmax_lastdim(x), rng); };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{x});
  });

  runner.run("add", [](Rng& rng) {
    D a = randn({2, 3}, rng, "a");
    D b = randn({2, 3}, rng, "b");
    auto loss = [=, &rng]() mutable { return weighted_sum(add(a, b), rng); };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{a, b});
  });

  runner.run("mul", [](Rng& rng) {
    D a = randn({2, 3}, rng, "a");
    D b = randn({2, 3}, rng, "b");
    auto loss = [=, &rng]() mutable { return weighted_sum(mul(a, b), rng); };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{a, b});
  });

  runner.run("gelu", [](Rng& rng) {
    D x = randn({7}, rng, "x");
    auto loss = [=, &rng]() mutable { return weighted_sum(gelu(x), rng); };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{x});
  });

  runner.run("conv2d_1x1", [](Rng& rng) {
    D x = randn({3, 4, 5}, rng, "x");
    D w = randn({2, 3, 1, 1}, rng, "w");
    D b = randn({2}, rng, "b");
    auto loss = [=, &rng]() mutable { return weighted_sum(conv2d(x, w, b, 1), rng); };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{x, w, b});
  });

  runner.run("conv2d_3x3", [](Rng& rng) {
    D x = randn({2, 5, 4}, rng, "x");
    D w = randn({3, 2, 3, 3}, rng, "w");
    D b = randn({3}, rng, "b");
    auto loss = [=, &rng]() mutable { return weighted_sum(conv2d(x, w, b, 1), rng); };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{x, w, b});
  });

  runner.run("conv2d_3x3_stride2", [](Rng& rng) {
    D x = randn({2, 6, 6}, rng, "x");
    D w = randn({3, 2, 3, 3}, rng, "w");
    D b = randn({3}, rng, "b");
    auto loss = [=, &rng]() mutable { return weighted_sum(conv2d(x, w, b, 2), rng); };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{x, w, b});
  });

  runner.run("resize_bilinear_up", [](Rng& rng) {
    D x = randn({2, 3, 4}, rng, "x");
    auto loss = [=, &rng]() mutable {
      return weighted_sum(resize_bilinear(x, 5, 7), rng);
    };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{x});
  });

  runner.run("resize_bilinear_down", [](Rng& rng) {
    D x = randn({2, 6, 4}, rng, "x");
    auto loss = [=, &rng]() mutable {
      return weighted_sum(resize_bilinear(x, 3, 2), rng);
    };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{x});
  });

  runner.run("concat_channels", [](Rng& rng) {
    D a = randn({2, 3, 3}, rng, "a");
    D b = randn({1, 3, 3}, rng, "b");
    auto loss = [=, &rng]() mutable {
      return weighted_sum(concat_channels(a, b), rng);
    };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{a, b});
  });

  runner.run("l2_normalize_channels", [](Rng& rng) {
    // Keep pixel vectors away from the non-differentiable zero.
    D x = randn({3, 3, 3}, rng, "x");
    {
      auto vals = x.mutable_values();
      const int64_t hw = 9;
      for (int64_t p = 0; p < hw; ++p) {
        double sq = 0.0;
        for (int64_t c = 0; c < 3; ++c) sq += vals[c * hw + p] * vals[c * hw + p];
        if (sq < 0.25) vals[p] += 1.0;
      }
    }
    auto loss = [=, &rng]() mutable {
      return weighted_sum(l2_normalize_channels(x), rng);
    };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{x});
  });

  runner.run("cross_entropy", [](Rng& rng) {
    D logits = randn({3, 4, 4}, rng, "logits");
    LabelMap labels = LabelMap::zeros(4, 4);
    Rng lr = rng.fork("labels");
    for (auto& v : labels.values) {
      const uint64_t draw = lr.uniform_int(4);
      v = draw == 3 ? kIgnoreIndex : static_cast<uint8_t>(draw);
    }
    if (labels.values[0] == kIgnoreIndex) labels.values[0] = 0;
    auto loss = [=]() { return cross_entropy(logits, labels, kIgnoreIndex); };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{logits});
  });

  runner.run("row_attention", [](Rng& rng) {
    D q = randn({4, 3, 4}, rng, "q");
    D k = randn({4, 3, 4}, rng, "k");
    D v = randn({4, 3, 4}, rng, "v");
    D gx = randn({12, 4}, rng, "gx");
    auto loss = [=, &rng]() mutable {
      return weighted_sum(row_attention(q, k, v, gx, 2), rng);
    };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{q, k, v, gx});
  });

  runner.run("col_attention", [](Rng& rng) {
    D q = randn({4, 3, 4}, rng, "q");
    D k = randn({4, 3, 4}, rng, "k");
    D v = randn({4, 3, 4}, rng, "v");
    D gy = randn({12, 3}, rng, "gy");
    auto loss = [=, &rng]() mutable {
      return weighted_sum(col_attention(q, k, v, gy, 2), rng);
    };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{q, k, v, gy});
  });

  runner.run("project_embedding", [](Rng& rng) {
    GeoEmbedding<double> embedding;
    embedding.values = randn({5, 3, 3}, rng, "e");
    GeoAdapterWeights<double> w;
    w.proj_w = randn({3, 5, 1, 1}, rng, "w");
    w.proj_b = randn({3}, rng, "b");
    auto loss = [=, &rng]() mutable {
      return weighted_sum(project_embedding(embedding, w), rng);
    };
    return std::make_pair(std::function<D()>(loss),
                          std::vector<D>{embedding.values, w.proj_w, w.proj_b});
  });

  runner.run("directional_affinities", [](Rng& rng) {
    D g0 = randn({3, 3, 4}, rng, "g");
    D tau = uniform_tensor<double>({1}, rng, 0.5, 1.5, true);
    auto loss = [=, &rng]() mutable {
      auto [gx, gy] = directional_affinities(l2_normalize_channels(g0), tau);
      Rng r1 = rng.fork("wx");
      Rng r2 = rng.fork("wy");
      return add(sum(mul(gx, uniform_tensor<double>(gx.shape(), r1, 0.25, 1.75))),
                 sum(mul(gy, uniform_tensor<double>(gy.shape(), r2, 0.25, 1.75))));
    };
    return std::make_pair(std::function<D()>(loss), std::vector<D>{g0, tau});
  });

  runner.run("smm_forward_block", [](Rng& rng) {
    const int64_t c = 4, h = 6, w = 8, latent = 8;
    D feature = randn({c, h, w}, rng, "f");
    D g0 = randn({3, h, w}, rng, "g");
    D tau = uniform_tensor<double>({1}, rng, 0.5, 1.5, true);
    auto weights = SmmWeights<double>::init(c, latent, 2, rng.fork("w"));
    {
      // Random final layer so gradients flow through every path.
      Rng wr = rng.fork("mlp2");
      for (auto& v : weights.mlp2_w.mutable_values()) v = wr.normal(0.0, 0.2);
      for (auto& v : weights.mlp2_b.mutable_values()) v = wr.normal(0.0, 0.2);
    }
    auto loss = [=, &rng]() mutable {
      StructuralPrior<double> prior;
      prior.geometry = l2_normalize_channels(g0);
      auto [gx, gy] = directional_affinities(prior.geometry, tau);
      prior.gx = gx;
      prior.gy = gy;
      return weighted_sum(smm_forward(feature, prior, weights), rng);
    };
    std::vector<D> params{feature, g0, tau};
    auto wp = weights.parameters();
    params.insert(params.end(), wp.begin(), wp.end());
    return std::make_pair(std::function<D()>(loss), std::move(params));
  });

  runner.run("encode_semantic", [](Rng& rng) {
    GeoEmbedding<double> embedding;
    embedding.values = randn({4, 4, 4}, rng, "e");
    auto weights = SemmWeights<double>::init(4, 4, 3, rng.fork("w"));
    auto loss = [=, &rng]() mutable {
      return weighted_sum(encode_semantic(embedding, weights), rng);
    };
    std::vector<D> params{embedding.values};
    auto wp = weights.parameters();
    params.insert(params.end(), wp.begin(), wp.begin() + 4);  // encoder only
    return std::make_pair(std::function<D()>(loss), std::move(params));
  });

  runner.run("inject_semantic_block", [](Rng& rng) {
    GeoEmbedding<double> embedding;
    embedding.values = randn({4, 3, 3}, rng, "e");
    D mask = randn({3, 5, 6}, rng, "m");
    auto weights = SemmWeights<double>::init(4, 4, 3, rng.fork("w"));
    {
      Rng wr = rng.fork("proj");
      for (auto& v : weights.proj_w.mutable_values()) v = wr.normal(0.0, 0.2);
      for (auto& v : weights.proj_b.mutable_values()) v = wr.normal(0.0, 0.2);
    }
    auto loss = [=, &rng]() mutable {
      return weighted_sum(
          inject_semantic(mask, encode_semantic(embedding, weights), weights), rng);
    };
    std::vector<D> params{mask, embedding.values};
    auto wp = weights.parameters();
    params.insert(params.end(), wp.begin(), wp.end());
    return std::make_pair(std::function<D()>(loss), std::move(params));
  });

  runner.run("pixel_decode", [](Rng& rng) {
    ModelConfig cfg;
    cfg.num_classes = 3;
    cfg.height = 32;
    cfg.width = 32;
    cfg.stage_widths = {4, 4, 6, 6};
    cfg.stem_channels = 4;
    cfg.mask_channels = 4;
    cfg.smm_latent_cap = 4;
    cfg.seed = rng.next_u64();
    auto weights = SegNetWeights<double>::init(cfg);
    FeaturePyramid<double> pyramid;
    pyramid.levels[0] = randn({4, 8, 8}, rng, "f0");
    pyramid.levels[1] = randn({4, 4, 4}, rng, "f1");
    pyramid.levels[2] = randn({6, 2, 2}, rng, "f2");
    pyramid.levels[3] = randn({6, 1, 1}, rng, "f3");
    auto loss = [=, &rng]() mutable {
      return weighted_sum(pixel_decode(pyramid, weights), rng);
    };
    std::vector<D> params(pyramid.levels.begin(), pyramid.levels.end());
    for (int s = 0; s < 4; ++s) {
      params.push_back(weights.lateral_w[static_cast<size_t>(s)]);
      params.push_back(weights.lateral_b[static_cast<size_t>(s)]);
    }
    params.push_back(weights.smooth_w);
    params.push_back(weights.smooth_b);
    return std::make_pair(std::function<D()>(loss), std::move(params));
  });

  return results;
}

}  // namespace ssdm
