#include "iclv/sample.hpp"

#include <string>

#include "iclv/errors.hpp"

namespace iclv {

namespace {
[[noreturn]] void fail(const std::string& id, const std::string& what) {
    throw SchemaError("individual '" + id + "': " + what);
}
}  // namespace

void validate(const Sample& sample) {
    if (sample.q() == 0) throw SchemaError("sample holds no individuals");
    if (sample.n_latents < 1 || sample.n_indicators < 1 || sample.n_levels < 2 ||
        sample.n_tasks < 1 || sample.n_alternatives < 2 || sample.n_attributes < 1)
        throw SchemaError("sample dimensional card is incomplete");

    for (const auto& ind : sample.individuals) {
        if (static_cast<int>(ind.s.size()) != sample.n_latents)
            fail(ind.id, "structural covariate vectors != latent count");
        for (const auto& sv : ind.s)
            if (!sv.allFinite()) fail(ind.id, "non-finite structural covariate");
        if (ind.x_star.rows() != sample.n_indicators ||
            ind.x_star.cols() != sample.n_meas_covariates)
            fail(ind.id, "measurement covariate matrix has wrong shape");
        if (!ind.x_star.allFinite()) fail(ind.id, "non-finite measurement covariate");
        if (ind.y.size() != sample.n_indicators)
            fail(ind.id, "indicator response count != H");
        for (int h = 0; h < sample.n_indicators; ++h)
            if (ind.y(h) < 1 || ind.y(h) > sample.n_levels)
                fail(ind.id, "indicator " + std::to_string(h + 1) + " response " +
                                 std::to_string(ind.y(h)) + " outside 1.." +
                                 std::to_string(sample.n_levels));
        if (static_cast<int>(ind.tasks.size()) != sample.n_tasks)
            fail(ind.id, "choice task count != T");
        for (size_t t = 0; t < ind.tasks.size(); ++t) {
            const auto& task = ind.tasks[t];
            if (task.x.rows() != sample.n_attributes ||
                task.x.cols() != sample.n_alternatives)
                fail(ind.id, "task " + std::to_string(t + 1) +
                                 " attribute matrix has wrong shape");
            if (!task.x.allFinite())
                fail(ind.id, "task " + std::to_string(t + 1) + " has non-finite attribute");
            if (task.chosen < 1 || task.chosen > sample.n_alternatives)
                fail(ind.id, "task " + std::to_string(t + 1) + " chosen alternative " +
                                 std::to_string(task.chosen) + " outside 1.." +
                                 std::to_string(sample.n_alternatives));
        }
    }
}

}  // namespace iclv
