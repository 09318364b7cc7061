// Writes the synthetic ten-blob store (300 geotagged records in the study
// area, one out-of-area tweet, two tweets without coordinates).

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fixtures.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Write the ten-blob fixture store"};
    std::string out;
    std::uint64_t seed = zoi::fixtures::kTenBlobSeed;
    app.add_option("--out", out, "Store directory to create")->required();
    app.add_option("--seed", seed, "Blob placement seed")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        const auto data = zoi::fixtures::write_ten_blob_store(out, seed);
        std::cout << "wrote " << data.points.size() + 3 << " documents to " << out << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
