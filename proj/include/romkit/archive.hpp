#pragma once

#include "romkit/certify.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace romkit {

inline constexpr const char* kFormatVersion = "1";

// RBM1 payload: "RBM1", u64 LE rows, u64 LE cols, rows*cols f64 LE, row-major.
std::string encode_payload(const Matrix& m);
Matrix decode_payload(const std::string& bytes, const std::string& name);

void write_payload(const std::filesystem::path& path, const Matrix& m);
Matrix read_payload(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

// Enough to rebuild the full-order problem: the thermal-block configuration,
// or a copy of an external manifest together with the files it references.
struct ExternalCopy
{
  std::map<std::string, std::string> files;  // file name -> bytes, includes "manifest.json"
};

using ProblemDescriptor = std::variant<ThermalBlockConfig, ExternalCopy>;

ProblemDescriptor describe_problem(const AffineProblem& problem);

struct ModelArchive
{
  ProblemDescriptor problem;
  ReducedBasis basis;   // empty after an online-scope load
  ReducedModel model;
  ResidualData residual;
  std::uint64_t problem_fingerprint = 0;
  std::size_t n_dofs = 0;
};

ModelArchive make_archive(const AffineProblem& problem, const ReducedBasis& basis,
                          const ReducedModel& model, const ResidualData& residual);

void save_model(const std::filesystem::path& directory, const ModelArchive& archive);

enum class LoadScope
{
  Full,    // everything, including the N x N_delta basis
  Online,  // reduced blocks, residual data and metadata only
};

struct LoadedModel
{
  ModelArchive archive;
  std::vector<std::string> access_log;  // files opened, in order
};

LoadedModel load_model(const std::filesystem::path& directory, LoadScope scope = LoadScope::Full);

// Rebuilds the full-order problem of an archive and checks its fingerprint.
AffineProblem rebuild_problem(const std::filesystem::path& directory, const ModelArchive& archive);

} // namespace romkit
