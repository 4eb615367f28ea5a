// End-to-end checks of the gazegen binary: exit codes, determinism, and the
// file formats. The binary path arrives via the GAZEGEN_CLI environment
// variable set by ctest.

#include "gazegen/gaze_model.hpp"
#include "gazegen/lm.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("GAZEGEN_CLI");
    REQUIRE_MESSAGE(p != nullptr, "GAZEGEN_CLI must point at the gazegen binary");
    return p;
}

int run(const std::string& args, const fs::path& stderr_to = {}) {
    std::string cmd = "\"" + cli_path() + "\" " + args + " >/dev/null";
    cmd += stderr_to.empty() ? " 2>/dev/null" : " 2>\"" + stderr_to.string() + "\"";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << content;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gazegen_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

const char* kTinyCorpus =
    "the cat sat on the mat\n"
    "the dog sat on the rug\n"
    "the cat saw the dog\n"
    "the dog saw the cat near the gate\n";

const char* kLexicon =
    "#total:1000000\n"
    "the\t50000\ncat\t200\ndog\t180\nsat\t90\non\t20000\nmat\t60\nrug\t20\n"
    "saw\t900\nnear\t800\ngate\t150\n";

} // namespace

TEST_CASE("train-lm produces a loadable, byte-stable model; bad input exits 2") {
    TempDir dir;
    write_file(dir.path / "corpus.txt", kTinyCorpus);
    std::string base = "train-lm --corpus \"" + (dir.path / "corpus.txt").string() +
                       "\" --order 2 --alpha 0.5 --merges 20 --out ";
    CHECK(run(base + "\"" + (dir.path / "m1.json").string() + "\"") == 0);
    CHECK(run(base + "\"" + (dir.path / "m2.json").string() + "\"") == 0);
    CHECK(slurp(dir.path / "m1.json") == slurp(dir.path / "m2.json"));

    gazegen::NGramModel model = gazegen::NGramModel::load((dir.path / "m1.json").string());
    CHECK(model.order() == 2);
    CHECK(model.vocab().size() > 3);

    CHECK(run("train-lm --corpus /no/such/file --out x.json") == 2);
}

TEST_CASE("train-gaze fits and persists; rank-deficient input exits 3") {
    TempDir dir;
    write_file(dir.path / "lex.tsv", kLexicon);
    // Varied lengths and frequencies; fprt rises with length.
    std::string measures = "reader_id,text_id,word_index,word,fprt_ms,go_past_ms,skipped\n";
    const char* words[] = {"the", "cat", "sat", "on", "rug", "near", "gate", "dog", "mat"};
    for (int reader = 1; reader <= 3; ++reader)
        for (int i = 0; i < 9; ++i) {
            measures += "r" + std::to_string(reader) + ",t1," + std::to_string(i) + "," +
                        words[i] + "," +
                        std::to_string(80 + 20 * static_cast<int>(std::string(words[i]).size()) +
                                       7 * reader + 3 * i) +
                        ",300,0\n";
        }
    write_file(dir.path / "measures.csv", measures);

    std::string out = (dir.path / "gaze.txt").string();
    CHECK(run("train-gaze --measures \"" + (dir.path / "measures.csv").string() +
              "\" --lexicon \"" + (dir.path / "lex.tsv").string() + "\" --out \"" + out +
              "\"") == 0);
    gazegen::LinearGazeModel model = gazegen::LinearGazeModel::load(out);
    CHECK(model.normalization().sigma > 0.0);

    // Single repeated word: every feature column is constant -> collinear
    // with the intercept.
    std::string degenerate = "reader_id,text_id,word_index,word,fprt_ms,go_past_ms,skipped\n";
    for (int i = 0; i < 12; ++i)
        degenerate += "r1,t1," + std::to_string(i) + ",the," +
                      std::to_string(100 + i) + ",200,0\n";
    write_file(dir.path / "degenerate.csv", degenerate);
    CHECK(run("train-gaze --measures \"" + (dir.path / "degenerate.csv").string() +
              "\" --lexicon \"" + (dir.path / "lex.tsv").string() + "\" --out \"" +
              (dir.path / "g2.txt").string() + "\"") == 3);
}

TEST_CASE("generate: weight 0 equals the gaze-free run; big weights warn") {
    TempDir dir;
    write_file(dir.path / "corpus.txt", kTinyCorpus);
    write_file(dir.path / "lex.tsv", kLexicon);
    std::string lm = (dir.path / "lm.json").string();
    REQUIRE(run("train-lm --corpus \"" + (dir.path / "corpus.txt").string() +
                "\" --order 2 --alpha 0.2 --merges 30 --out \"" + lm + "\"") == 0);

    // A quick gaze model from a small fixture.
    std::string measures = "reader_id,text_id,word_index,word,fprt_ms,go_past_ms,skipped\n";
    const char* words[] = {"the", "cat", "sat", "on", "rug", "near", "gate", "dog"};
    for (int reader = 1; reader <= 2; ++reader)
        for (int i = 0; i < 8; ++i)
            measures += "r" + std::to_string(reader) + ",t1," + std::to_string(i) + "," +
                        words[i] + "," +
                        std::to_string(70 + 25 * static_cast<int>(std::string(words[i]).size()) +
                                       5 * reader + 2 * i) +
                        ",300,0\n";
    write_file(dir.path / "measures.csv", measures);
    std::string gaze = (dir.path / "gaze.txt").string();
    REQUIRE(run("train-gaze --measures \"" + (dir.path / "measures.csv").string() +
                "\" --lexicon \"" + (dir.path / "lex.tsv").string() + "\" --out \"" + gaze +
                "\"") == 0);

    std::string common = "generate --lm \"" + lm + "\" --prompt \"the cat\" --max-tokens 6 ";
    std::string with_gaze = (dir.path / "w0.jsonl").string();
    std::string without = (dir.path / "nogaze.jsonl").string();
    CHECK(run(common + "--gaze \"" + gaze + "\" --lexicon \"" + (dir.path / "lex.tsv").string() +
              "\" --gaze-weight 0 --out \"" + with_gaze + "\"") == 0);
    CHECK(run(common + "--out \"" + without + "\"") == 0);

    auto text_of = [](const std::string& jsonl) {
        auto pos = jsonl.find("\"text\":");
        REQUIRE(pos != std::string::npos);
        auto end = jsonl.find("\",\"", pos + 8);
        return jsonl.substr(pos, end - pos);
    };
    CHECK(text_of(slurp(with_gaze)) == text_of(slurp(without)));

    // |w| > 3 warns on stderr but succeeds.
    fs::path errfile = dir.path / "stderr.txt";
    CHECK(run(common + "--gaze \"" + gaze + "\" --lexicon \"" +
              (dir.path / "lex.tsv").string() + "\" --gaze-weight 4 --out \"" +
              (dir.path / "w4.jsonl").string() + "\"", errfile) == 0);
    CHECK(slurp(errfile).find("warning") != std::string::npos);

    // |w| > 5 is rejected.
    CHECK(run(common + "--gaze \"" + gaze + "\" --lexicon \"" +
              (dir.path / "lex.tsv").string() + "\" --gaze-weight 5.5 --out \"" +
              (dir.path / "w6.jsonl").string() + "\"") == 2);

    // Sweep: 2 prompts x 3 weights = 6 records. EOS-free training keeps the
    // outputs at the full token budget so MTLD is defined for stats below.
    std::string lm_noeos = (dir.path / "lm_noeos.json").string();
    REQUIRE(run("train-lm --corpus \"" + (dir.path / "corpus.txt").string() +
                "\" --order 2 --alpha 0.01 --merges 30 --no-append-eos --out \"" +
                lm_noeos + "\"") == 0);
    std::string sweep = (dir.path / "sweep.jsonl").string();
    CHECK(run("generate --lm \"" + lm_noeos + "\" --gaze \"" + gaze + "\" --lexicon \"" +
              (dir.path / "lex.tsv").string() +
              "\" --prompt \"the cat\" --prompt \"the dog\" --gaze-weight -2 "
              "--gaze-weight 0 --gaze-weight 2 --max-tokens 24 --out \"" +
              sweep + "\"") == 0);
    std::istringstream lines(slurp(sweep));
    std::string line;
    int n = 0;
    while (std::getline(lines, line))
        if (!line.empty())
            ++n;
    CHECK(n == 6);

    // stats over the sweep: one row per record plus the header.
    std::string stats_csv = (dir.path / "stats.csv").string();
    CHECK(run("stats \"" + sweep + "\" --lexicon \"" + (dir.path / "lex.tsv").string() +
              "\" --out \"" + stats_csv + "\"") == 0);
    std::istringstream stats_lines(slurp(stats_csv));
    int rows = 0;
    while (std::getline(stats_lines, line))
        if (!line.empty())
            ++rows;
    CHECK(rows == 7);
}

TEST_CASE("eval-gaze: predictions equal to observations give R^2 = 1") {
    TempDir dir;
    write_file(dir.path / "lex.tsv", kLexicon);
    // Hand-written model: prediction = len_0 exactly; mu=0, sigma=1 mean the
    // observed fprt is compared as-is.
    write_file(dir.path / "gaze.txt",
               "gazegen.gaze-linear v1\n"
               "len_0 1\nlen_1 0\nlen_2 0\nzipf_0 0\nzipf_1 0\nzipf_2 0\n"
               "intercept 0\nmu 0\nsigma 1\n");
    std::string measures = "reader_id,text_id,word_index,word,fprt_ms,go_past_ms,skipped\n";
    const char* words[] = {"the", "cat", "on", "near", "gate", "rug"};
    for (int i = 0; i < 6; ++i)
        measures += "r1,t1," + std::to_string(i) + "," + words[i] + "," +
                    std::to_string(std::string(words[i]).size()) + ".0,99,0\n";
    write_file(dir.path / "measures.csv", measures);

    std::string out = (dir.path / "eval.csv").string();
    CHECK(run("eval-gaze --model \"" + (dir.path / "gaze.txt").string() + "\" --measures \"" +
              (dir.path / "measures.csv").string() + "\" --lexicon \"" +
              (dir.path / "lex.tsv").string() + "\" --out \"" + out + "\"") == 0);
    std::string csv = slurp(out);
    CHECK(csv.find("r2,,1,") != std::string::npos);
    CHECK(csv.find("mse,,0,") != std::string::npos);
    CHECK(csv.find("pearson,overall,1,") != std::string::npos);
}

TEST_CASE("analyze writes coefficient and group-mean CSVs") {
    TempDir dir;
    std::string obs = "reader_id,group,gaze_weight,text_id,word_index,word,fprt_ms\n";
    const char* words[] = {"the", "cat", "observatory", "on", "magnificent", "rug"};
    int weights[] = {-2, 0, 2};
    for (int reader = 0; reader < 4; ++reader)
        for (int w = 0; w < 3; ++w)
            for (int i = 0; i < 6; ++i) {
                int len = static_cast<int>(std::string(words[i]).size());
                int fprt = 90 + 18 * len + 25 * weights[w] + 6 * reader + (i * 7 % 11);
                obs += "r" + std::to_string(reader) + "," +
                       (reader < 2 ? "L1" : "L2") + "," + std::to_string(weights[w]) +
                       ",t1," + std::to_string(i) + "," + words[i] + "," +
                       std::to_string(fprt) + "\n";
            }
    write_file(dir.path / "obs.csv", obs);
    write_file(dir.path / "prev.tsv",
               "the\t2.5\ncat\t2.2\non\t2.4\nrug\t1.9\nobservatory\t1.1\n"); // one word missing

    std::string coef = (dir.path / "coef.csv").string();
    std::string means = (dir.path / "means.csv").string();
    CHECK(run("analyze --observations \"" + (dir.path / "obs.csv").string() +
              "\" --prevalence \"" + (dir.path / "prev.tsv").string() +
              "\" --out-coefficients \"" + coef + "\" --out-group-means \"" + means +
              "\"") == 0);
    std::string coef_csv = slurp(coef);
    CHECK(coef_csv.find("gaze_weight[+2]") != std::string::npos);
    CHECK(coef_csv.find("word_prevalence") != std::string::npos);
    CHECK(coef_csv.find("L2") != std::string::npos);
    std::string means_csv = slurp(means);
    CHECK(means_csv.find("L1,-2,") != std::string::npos);
    CHECK(means_csv.find("L2,2,") != std::string::npos);
}
