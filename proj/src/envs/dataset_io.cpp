#include "ltvnet/envs/dataset_io.hpp"

#include "ltvnet/common/csv.hpp"

namespace ltvnet::envs {

std::string dataset_header(Eigen::Index state_dim, Eigen::Index control_dim) {
    std::string h = "traj_id,step";
    for (Eigen::Index i = 0; i < state_dim; ++i) h += ",x_" + std::to_string(i);
    for (Eigen::Index i = 0; i < control_dim; ++i) h += ",u_" + std::to_string(i);
    for (Eigen::Index i = 0; i < state_dim; ++i) h += ",xdot_" + std::to_string(i);
    h += ",dt";
    return h;
}

std::string format_dataset(const Collection& data, Eigen::Index state_dim,
                           Eigen::Index control_dim) {
    std::string out = dataset_header(state_dim, control_dim);
    out += '\n';
    for (std::size_t r = 0; r < data.transitions.size(); ++r) {
        const auto& t = data.transitions[r];
        require_dims(t.x.size() == state_dim && t.u.size() == control_dim, "dataset row");
        out += std::to_string(data.traj_ids[r]);
        out += ',';
        out += std::to_string(data.steps[r]);
        for (Eigen::Index i = 0; i < state_dim; ++i) out += ',' + format_double(t.x(i));
        for (Eigen::Index i = 0; i < control_dim; ++i) out += ',' + format_double(t.u(i));
        for (Eigen::Index i = 0; i < state_dim; ++i) out += ',' + format_double(t.xdot(i));
        out += ',' + format_double(t.dt);
        out += '\n';
    }
    return out;
}

void write_dataset(const std::filesystem::path& path, const Collection& data,
                   Eigen::Index state_dim, Eigen::Index control_dim) {
    write_file_atomic(path, format_dataset(data, state_dim, control_dim));
}

Collection read_dataset(const std::filesystem::path& path, Eigen::Index state_dim,
                        Eigen::Index control_dim) {
    const CsvTable table = read_csv(path);
    if (table.header != split(dataset_header(state_dim, control_dim), ',')) {
        throw DataError(path.string() + ": header does not match a dataset with N=" +
                        std::to_string(state_dim) + ", M=" + std::to_string(control_dim));
    }
    if (table.rows.empty()) {
        throw DataError(path.string() + ": dataset has no rows");
    }
    Collection c;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        try {
            std::size_t f = 0;
            const auto traj = parse_integer(row[f++]);
            const auto step = parse_integer(row[f++]);
            if (traj < 0 || step < 0) throw DataError("negative trajectory id or step");
            structnet::Transition t;
            t.x.resize(state_dim);
            t.u.resize(control_dim);
            t.xdot.resize(state_dim);
            for (Eigen::Index i = 0; i < state_dim; ++i) t.x(i) = parse_double(row[f++]);
            for (Eigen::Index i = 0; i < control_dim; ++i) t.u(i) = parse_double(row[f++]);
            for (Eigen::Index i = 0; i < state_dim; ++i) t.xdot(i) = parse_double(row[f++]);
            t.dt = parse_double(row[f++]);
            if (!(t.dt > 0.0)) throw DataError("dt must be positive");
            c.transitions.push_back(std::move(t));
            c.traj_ids.push_back(static_cast<std::size_t>(traj));
            c.steps.push_back(static_cast<std::size_t>(step));
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(table.line_numbers[r]) + ": " +
                            e.what());
        }
    }
    return c;
}

}  // namespace ltvnet::envs
