#pragma once

#include <map>
#include <string>
#include <vector>

#include "symfore/models.hpp"
#include "symfore/training.hpp"

namespace symfore::io {

// Plain-text run configuration: one `key=value` per line, '#' comments.
// Every key has a default; unknown keys are rejected so typos cannot silently
// fall back. Command-line overrides go through the same validation.
class RunConfig {
public:
    static RunConfig defaults();
    static RunConfig from_file(const std::string& path);

    void set(const std::string& key, const std::string& value);

    const std::string& gets(const std::string& key) const;
    int geti(const std::string& key) const;
    std::uint64_t getu64(const std::string& key) const;
    double getd(const std::string& key) const;
    bool getb(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;

    // pose_dim comes from the ingested data, everything else from the config
    models::ModelConfig model_config(int pose_dim) const;
    train::TrainConfig train_config() const;

    // full resolved configuration, sorted by key; echoed into every run log
    std::string serialize() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace symfore::io
