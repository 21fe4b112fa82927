#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "convexroof/density.hpp"
#include "convexroof/types.hpp"

namespace convexroof {

/// On-disk density-matrix document: JSON object with "dim", a row-major
/// "entries" array of [re, im] pairs, and optional metadata.
struct DensityMatrixFile {
    Matrix matrix;
    std::string label;
    std::vector<Index> qubit_structure;  // empty unless specified

    static DensityMatrixFile parse(const std::string& text) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw InvalidInputError(std::string("density-matrix file: JSON parse error: ") +
                                    e.what());
        }
        if (!doc.contains("dim") || !doc["dim"].is_number_integer())
            throw InvalidInputError("density-matrix file: missing integer field 'dim'");
        const Index dim = doc["dim"].get<Index>();
        if (dim < 1) throw InvalidInputError("density-matrix file: dim must be positive");
        if (!doc.contains("entries") || !doc["entries"].is_array() ||
            doc["entries"].size() != static_cast<std::size_t>(dim))
            throw InvalidInputError("density-matrix file: 'entries' must be a dim x dim array");
        DensityMatrixFile out;
        out.matrix = Matrix(dim, dim);
        for (Index i = 0; i < dim; ++i) {
            const auto& row = doc["entries"][i];
            if (!row.is_array() || row.size() != static_cast<std::size_t>(dim))
                throw InvalidInputError("density-matrix file: row " + std::to_string(i) +
                                        " has wrong length");
            for (Index j = 0; j < dim; ++j) {
                const auto& cell = row[j];
                if (!cell.is_array() || cell.size() != 2)
                    throw InvalidInputError("density-matrix file: entry (" + std::to_string(i) +
                                            ", " + std::to_string(j) +
                                            ") must be an [re, im] pair");
                out.matrix(i, j) = Complex(cell[0].get<double>(), cell[1].get<double>());
            }
        }
        if (doc.contains("label")) out.label = doc["label"].get<std::string>();
        if (doc.contains("qubits"))
            for (const auto& q : doc["qubits"]) out.qubit_structure.push_back(q.get<Index>());
        return out;
    }

    static DensityMatrixFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw InvalidInputError("cannot open density-matrix file '" + path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    /// Validates the stored matrix as a density matrix (throws with
    /// diagnostics on violation).
    DensityMatrix to_density() const { return DensityMatrix::from_matrix(matrix); }

    std::string serialize() const {
        nlohmann::json doc;
        doc["dim"] = matrix.rows();
        if (!label.empty()) doc["label"] = label;
        if (!qubit_structure.empty()) doc["qubits"] = qubit_structure;
        nlohmann::json entries = nlohmann::json::array();
        for (Index i = 0; i < matrix.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (Index j = 0; j < matrix.cols(); ++j)
                row.push_back({matrix(i, j).real(), matrix(i, j).imag()});
            entries.push_back(std::move(row));
        }
        doc["entries"] = std::move(entries);
        return doc.dump(1);
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw InvalidInputError("cannot write density-matrix file '" + path + "'");
        out << serialize() << '\n';
    }
};

/// CSV document with a config/seed comment line and a header row.
class CsvWriter {
  public:
    CsvWriter(std::string comment, std::vector<std::string> columns)
        : comment_(std::move(comment)), columns_(std::move(columns)) {}

    template <typename... Ts>
    void row(const Ts&... fields) {
        std::ostringstream line;
        line.precision(17);
        bool first = true;
        ((line << (first ? "" : ","), line << fields, first = false), ...);
        rows_.push_back(line.str());
    }

    std::string str() const {
        std::ostringstream out;
        out << "# " << comment_ << '\n';
        bool first = true;
        for (const auto& c : columns_) {
            if (!first) out << ',';
            out << c;
            first = false;
        }
        out << '\n';
        for (const auto& r : rows_) out << r << '\n';
        return out.str();
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw InvalidInputError("cannot write CSV file '" + path + "'");
        out << str();
    }

  private:
    std::string comment_;
    std::vector<std::string> columns_;
    std::vector<std::string> rows_;
};

}  // namespace convexroof
