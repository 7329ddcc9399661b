#include "sepl/train.hpp"

#include "sepl/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace sepl {

TrainResult train(Network net, std::span<const Sample> dataset, const TrainConfig& config,
                  const std::function<void(int, double)>& on_iteration) {
    if (dataset.empty()) throw Error("train: empty dataset");
    if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
        throw Error("train: learning rate must be finite and non-negative");
    }
    if (config.batch_size < 1) throw Error("train: batch size must be at least 1");
    if (config.iterations < 0) throw Error("train: negative iteration count");
    layer_shapes(net);
    for (const auto& s : dataset) {
        if (s.input.channels != net.input_channels || s.input.height != net.input_height ||
            s.input.width != net.input_width || s.target.channels != 1 ||
            s.target.height != net.input_height || s.target.width != net.input_width) {
            throw Error("train: sample shape does not match the network");
        }
    }

    std::vector<std::vector<double>> velocity(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        velocity[i].assign(net.layers[i].params.size(), 0.0);
    }

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = order.size();

    TrainResult result;
    result.loss_history.reserve(static_cast<std::size_t>(config.iterations));
    std::vector<std::vector<double>> sum(net.layers.size());

    for (int it = 0; it < config.iterations; ++it) {
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i].assign(net.layers[i].params.size(), 0.0);
        double batch_loss = 0.0;
        for (int b = 0; b < config.batch_size; ++b) {
            if (cursor == order.size()) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            const Sample& s = dataset[order[cursor++]];
            const Gradients g = backward(net, s.input, s.target);
            batch_loss += g.loss;
            for (std::size_t i = 0; i < sum.size(); ++i)
                for (std::size_t k = 0; k < sum[i].size(); ++k) sum[i][k] += g.layers[i][k];
        }
        const double scale = 1.0 / config.batch_size;
        batch_loss *= scale;
        if (!std::isfinite(batch_loss)) {
            throw Error("training diverged at iteration " + std::to_string(it));
        }
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            auto& params = net.layers[i].params;
            auto& v = velocity[i];
            for (std::size_t k = 0; k < params.size(); ++k) {
                v[k] = config.momentum * v[k] - config.learning_rate * (sum[i][k] * scale);
                params[k] = static_cast<float>(static_cast<double>(params[k]) + v[k]);
            }
        }
        result.loss_history.push_back(batch_loss);
        if (on_iteration) on_iteration(it, batch_loss);
    }
    result.network = std::move(net);
    return result;
}

}  // namespace sepl
