#include "cbir/pipeline.hpp"
#include "cbir/error.hpp"

#include <algorithm>

namespace cbir {

SvmRetrieval svm_retrieve(const MulticlassModel& model, const FeatureIndex& index, std::span<const double> descriptor,
                          std::size_t k, const DistanceMetric& metric, std::size_t classes) {
    if (classes < 1)
        throw Error(ErrorKind::InvalidParameter, "at least one class must be searched");
    SvmRetrieval out;
    out.prediction = model.predict(descriptor);

    const std::vector<std::size_t> order = out.prediction.ranking();
    std::vector<std::uint16_t> label_ids;
    for (std::size_t r = 0; r < std::min(classes, order.size()); ++r) {
        const auto& name = model.classes[order[r]];
        const auto it = std::find(index.labels().begin(), index.labels().end(), name);
        if (it != index.labels().end())
            label_ids.push_back(static_cast<std::uint16_t>(it - index.labels().begin()));
    }
    if (!label_ids.empty())
        out.results = knn_query_within(index, descriptor, label_ids, k, metric);
    return out;
}

} // namespace cbir
