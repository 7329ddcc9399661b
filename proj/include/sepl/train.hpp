#pragma once

#include "sepl/network.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace sepl {

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 4;
    int iterations = 2000;
    double momentum = 0.9;
    std::uint64_t seed = 1;
};

struct Sample {
    Tensor input;
    Tensor target;
};

struct TrainResult {
    Network network;
    std::vector<double> loss_history;  // mean per-sample loss of each mini-batch
};

/// Mini-batch SGD with momentum on the mean per-sample loss:
///   v <- momentum * v - learning_rate * g ;  w <- w + v
/// Batches are drawn from a seeded per-epoch shuffle. Throws when the loss
/// becomes non-finite, naming the iteration.
TrainResult train(Network net, std::span<const Sample> dataset, const TrainConfig& config,
                  const std::function<void(int, double)>& on_iteration = {});

}  // namespace sepl
