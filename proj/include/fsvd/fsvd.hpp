#pragma once

// Federated SVD over vertically partitioned data: dense linear algebra core,
// star-topology protocol simulation with exact transmission accounting, the
// aggregator-side covariance reconstruction attack, and the experiment
// harness behind the command-line tool.

#include "fsvd/approx_init.hpp"
#include "fsvd/attack.hpp"
#include "fsvd/costs.hpp"
#include "fsvd/errors.hpp"
#include "fsvd/experiment.hpp"
#include "fsvd/federation.hpp"
#include "fsvd/gram_schmidt.hpp"
#include "fsvd/io.hpp"
#include "fsvd/jacobi.hpp"
#include "fsvd/matrix.hpp"
#include "fsvd/message.hpp"
#include "fsvd/metrics.hpp"
#include "fsvd/partition.hpp"
#include "fsvd/randomized.hpp"
#include "fsvd/reference_svd.hpp"
#include "fsvd/rng.hpp"
#include "fsvd/subspace_iteration.hpp"
#include "fsvd/svd_result.hpp"
#include "fsvd/transport.hpp"
#include "fsvd/wire.hpp"

namespace fsvd {
inline constexpr const char* kVersion = "1.0.0";
}
