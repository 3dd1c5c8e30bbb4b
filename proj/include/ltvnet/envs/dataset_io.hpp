#pragma once

#include <filesystem>
#include <string>

#include "ltvnet/envs/env.hpp"

namespace ltvnet::envs {

// Dataset CSV: traj_id, step, x_0..x_{N-1}, u_0..u_{M-1}, xdot_0..xdot_{N-1}, dt
std::string dataset_header(Eigen::Index state_dim, Eigen::Index control_dim);
std::string format_dataset(const Collection& data, Eigen::Index state_dim,
                           Eigen::Index control_dim);
void write_dataset(const std::filesystem::path& path, const Collection& data,
                   Eigen::Index state_dim, Eigen::Index control_dim);

// Parses a dataset written by write_dataset. Throws DataError naming the
// file (and line, for malformed rows), including for files with no rows.
Collection read_dataset(const std::filesystem::path& path, Eigen::Index state_dim,
                        Eigen::Index control_dim);

}  // namespace ltvnet::envs
