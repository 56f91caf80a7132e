#pragma once

#include <deque>
#include <utility>
#include <vector>

#include "stormsim/clustering.hpp"

namespace stormsim {

/// Circular buffer of the most recent M fingerprints with their insertion
/// timestamps. Eviction is strictly FIFO; iteration order equals insertion
/// order.
class FingerprintHistory {
public:
    explicit FingerprintHistory(int capacity);

    void push(SimTime t, const Fingerprint& fp);

    int capacity() const noexcept { return capacity_; }
    int size() const noexcept { return static_cast<int>(buffer_.size()); }
    bool empty() const noexcept { return buffer_.empty(); }

    /// Snapshot of the buffered fingerprints in insertion order.
    std::vector<Fingerprint> points() const;

    const std::deque<std::pair<SimTime, Fingerprint>>& entries() const noexcept {
        return buffer_;
    }

private:
    int capacity_;
    std::deque<std::pair<SimTime, Fingerprint>> buffer_;
};

/// One pass of the window-classification algorithm: appends the window's
/// fingerprints to the history, computes the completion ratios R1 = N5/N3 and
/// R2 = N5/N4 (a zero denominator yields 1.0, "fully completed"), and
/// classifies the window. The attack branch clusters the history and flags
/// every cluster whose relative density exceeds the T3 threshold; if none
/// does, the verdict downgrades to high load with a note.
DetectionVerdict ingest_window(const WindowKpm& kpm, FingerprintHistory& history,
                               const AlgorithmParams& params);

/// Stateful wrapper, one per cell. Instances for different cells are
/// independent and may run in parallel; a single instance expects one
/// logical window stream.
class Detector {
public:
    explicit Detector(AlgorithmParams params)
        : params_(std::move(params)), history_(params_.history_size_m) {}

    DetectionVerdict ingest(const WindowKpm& kpm) { return ingest_window(kpm, history_, params_); }

    const AlgorithmParams& params() const noexcept { return params_; }
    const FingerprintHistory& history() const noexcept { return history_; }

private:
    AlgorithmParams params_;
    FingerprintHistory history_;
};

}  // namespace stormsim
