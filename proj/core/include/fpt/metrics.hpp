#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fpt {

struct IouReport {
  std::vector<std::optional<double>> per_class;  // empty when absent from both
  std::optional<double> mean;                    // over classes that occur
  std::vector<std::uint64_t> confusion;          // C x C, truth-major
};

/// Per-class intersection-over-union and its mean. Points whose truth equals
/// `ignore` are skipped; any other label must be below num_classes.
IouReport miou(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth,
               std::uint32_t num_classes, std::optional<std::uint32_t> ignore = std::nullopt);

}  // namespace fpt
