#include "fpt/metrics.hpp"

#include <string>

#include "fpt/error.hpp"

namespace fpt {

IouReport miou(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth,
               std::uint32_t num_classes, std::optional<std::uint32_t> ignore) {
  if (pred.size() != truth.size())
    throw InvalidArgument("prediction has " + std::to_string(pred.size()) + " labels, truth has " +
                          std::to_string(truth.size()));
  if (num_classes == 0) throw InvalidArgument("num_classes must be positive");
  const std::size_t c = num_classes;
  IouReport r;
  r.confusion.assign(c * c, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (ignore && truth[i] == *ignore) continue;
    if (truth[i] >= num_classes || pred[i] >= num_classes)
      throw InvalidArgument("label out of range at index " + std::to_string(i));
    ++r.confusion[truth[i] * c + pred[i]];
  }
  r.per_class.resize(c);
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t k = 0; k < c; ++k) {
    std::uint64_t row = 0, col = 0;
    for (std::size_t j = 0; j < c; ++j) {
      row += r.confusion[k * c + j];
      col += r.confusion[j * c + k];
    }
    const std::uint64_t tp = r.confusion[k * c + k];
    const std::uint64_t uni = row + col - tp;  // TP + FN + FP
    if (uni == 0) continue;
    r.per_class[k] = static_cast<double>(tp) / static_cast<double>(uni);
    sum += *r.per_class[k];
    ++present;
  }
  if (present > 0) r.mean = sum / static_cast<double>(present);
  return r;
}

}  // namespace fpt
