#pragma once

#include <string>

#include "qrnn/baselines.hpp"
#include "qrnn/model.hpp"

namespace qrnn {

/// Checkpoint container: JSON with a header (model kind, loss, alpha,
/// sigma, activation, seed, layer dims) and "layer.<l>.W|U|b" keys holding
/// row-major arrays of 4-component entries (1-component for the real
/// baseline). Doubles are serialized shortest-round-trip, so save/load is
/// lossless at double precision.
struct QrnnCheckpoint {
    QrnnParams params;
    TrainConfig config;
};

struct RealRnnCheckpoint {
    RealRnnParams params;
    RealRnnConfig config;
};

void save_checkpoint(const std::string& path, const QrnnParams& params, const TrainConfig& cfg);
void save_checkpoint(const std::string& path, const RealRnnParams& params,
                     const RealRnnConfig& cfg);

/// Model kind tag stored in a checkpoint file ("qrnn" or "rnn").
std::string checkpoint_kind(const std::string& path);

QrnnCheckpoint load_qrnn_checkpoint(const std::string& path);
RealRnnCheckpoint load_rnn_checkpoint(const std::string& path);

}  // namespace qrnn
