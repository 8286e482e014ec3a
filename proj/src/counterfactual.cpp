#include "matchmarket/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace mm::school {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

int parse_int(const std::string& s, const std::string& what, int line_no) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": cannot parse " + what +
                                 " from '" + s + "'");
    }
}

}  // namespace

std::optional<int> Programs::index_of(const std::string& id) const {
    for (int p = 0; p < size(); ++p)
        if (programs[p].id == id) return p;
    return std::nullopt;
}

Programs load_programs(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_programs: cannot open '" + path + "'");
    std::string line;
    int line_no = 0;
    if (!std::getline(f, line))
        throw std::runtime_error("load_programs: '" + path + "' is empty (header expected)");
    ++line_no;
    {
        const auto header = split_csv(line);
        if (header.size() != 2 || header[0] != "program_id" || header[1] != "capacity")
            throw std::runtime_error("load_programs: line 1: expected header 'program_id,capacity'");
    }
    Programs out;
    std::unordered_map<std::string, int> index;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv(line);
        if (fields.size() != 2)
            throw std::runtime_error("load_programs: line " + std::to_string(line_no) +
                                     ": expected 2 fields, got " + std::to_string(fields.size()));
        const int cap = parse_int(fields[1], "capacity", line_no);
        if (cap < 1)
            throw std::runtime_error("load_programs: line " + std::to_string(line_no) +
                                     ": capacity must be >= 1 for program '" + fields[0] + "'");
        if (index.count(fields[0]))
            throw std::runtime_error("load_programs: line " + std::to_string(line_no) +
                                     ": duplicate program id '" + fields[0] + "'");
        index.emplace(fields[0], out.size());
        out.programs.push_back({fields[0], cap});
    }
    return out;
}

Roster load_roster(const std::string& path, const Programs& programs) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_roster: cannot open '" + path + "'");
    std::string line;
    int line_no = 0;
    if (!std::getline(f, line))
        throw std::runtime_error("load_roster: '" + path + "' is empty (header expected)");
    ++line_no;
    bool has_class = false;
    {
        const auto header = split_csv(line);
        if (header.size() == 4 && header[3] == "priority_class")
            has_class = true;
        else if (header.size() != 3)
            throw std::runtime_error(
                "load_roster: line 1: expected header 'student_id,rank,program_id[,priority_class]'");
        if (header[0] != "student_id" || header[1] != "rank" || header[2] != "program_id")
            throw std::runtime_error(
                "load_roster: line 1: expected header 'student_id,rank,program_id[,priority_class]'");
    }

    std::unordered_map<std::string, int> program_index;
    for (int p = 0; p < programs.size(); ++p) program_index.emplace(programs.programs[p].id, p);

    struct Entry {
        int rank;
        std::int32_t program;
        std::int32_t cls;
        int line_no;
    };
    Roster out;
    std::unordered_map<std::string, int> student_index;
    std::vector<std::vector<Entry>> entries;
    std::vector<std::string> dangling;

    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv(line);
        if (static_cast<int>(fields.size()) != (has_class ? 4 : 3))
            throw std::runtime_error("load_roster: line " + std::to_string(line_no) +
                                     ": wrong field count");
        const int rank = parse_int(fields[1], "rank", line_no);
        if (rank < 1)
            throw std::runtime_error("load_roster: line " + std::to_string(line_no) +
                                     ": rank must start at 1");
        const auto pit = program_index.find(fields[2]);
        if (pit == program_index.end()) {
            dangling.push_back("line " + std::to_string(line_no) + ": '" + fields[2] + "'");
            continue;
        }
        const int cls = has_class && !fields[3].empty() ? parse_int(fields[3], "priority_class", line_no) : 0;
        auto sit = student_index.find(fields[0]);
        if (sit == student_index.end()) {
            sit = student_index.emplace(fields[0], out.size()).first;
            out.students.push_back({fields[0], {}, {}});
            entries.emplace_back();
        }
        entries[sit->second].push_back(
            {rank, static_cast<std::int32_t>(pit->second), static_cast<std::int32_t>(cls), line_no});
    }
    if (!dangling.empty()) {
        std::string msg = "load_roster: unknown program ids:";
        for (const auto& d : dangling) msg += " " + d + ";";
        throw std::runtime_error(msg);
    }

    for (int s = 0; s < out.size(); ++s) {
        auto& es = entries[s];
        std::sort(es.begin(), es.end(), [](const Entry& a, const Entry& b) { return a.rank < b.rank; });
        auto& st = out.students[s];
        for (int q = 0; q < static_cast<int>(es.size()); ++q) {
            if (es[q].rank != q + 1)
                throw std::runtime_error("load_roster: student '" + st.id +
                                         "': ranks must be consecutive from 1 (line " +
                                         std::to_string(es[q].line_no) + ")");
            st.prefs.push_back(es[q].program);
            st.priority_class.push_back(es[q].cls);
        }
        std::unordered_set<std::int32_t> seen(st.prefs.begin(), st.prefs.end());
        if (seen.size() != st.prefs.size())
            throw std::runtime_error("load_roster: student '" + st.id +
                                     "' lists a program more than once");
    }
    return out;
}

void save_programs(const Programs& programs, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_programs: cannot open '" + path + "'");
    f << "program_id,capacity\n";
    for (const auto& p : programs.programs) f << p.id << ',' << p.capacity << '\n';
}

void save_roster(const Roster& roster, const Programs& programs, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_roster: cannot open '" + path + "'");
    f << "student_id,rank,program_id,priority_class\n";
    for (const auto& s : roster.students)
        for (int q = 0; q < static_cast<int>(s.prefs.size()); ++q)
            f << s.id << ',' << q + 1 << ',' << programs.programs[s.prefs[q]].id << ','
              << s.priority_class[q] << '\n';
}

PriorityProfile apply_single_tiebreak(const Roster& roster, const Programs&, std::uint64_t seed) {
    const int n = roster.size();
    Rng rng = make_rng(seed);
    std::vector<std::int32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 0; i < n - 1; ++i) {
        const int j = i + uniform_index(rng, n - i);
        std::swap(perm[i], perm[j]);
    }
    PriorityProfile prio;
    prio.lottery.assign(n, 0);
    for (int pos = 0; pos < n; ++pos) prio.lottery[perm[pos]] = pos;
    return prio;
}

namespace {

// Priority class of student s at program p: the class attached to p on the
// student's own list (programs only rank their applicants).
std::int32_t class_at(const Student& s, std::int32_t program) {
    for (int q = 0; q < static_cast<int>(s.prefs.size()); ++q)
        if (s.prefs[q] == program) return s.priority_class[q];
    return 0;
}

using Key = std::pair<std::int32_t, std::int64_t>;  // (class, lottery); smaller = better

}  // namespace

std::vector<int> program_order(const Roster& roster, const PriorityProfile& prio, int program,
                               const std::vector<int>& applicants) {
    std::vector<int> out(applicants);
    std::sort(out.begin(), out.end(), [&](int a, int b) {
        return Key{class_at(roster.students[a], program), prio.lottery[a]} <
               Key{class_at(roster.students[b], program), prio.lottery[b]};
    });
    return out;
}

Assignment run_student_da(const Roster& roster, const Programs& programs,
                          const PriorityProfile& prio) {
    const int n_students = roster.size();
    if (static_cast<int>(prio.lottery.size()) != n_students)
        throw std::invalid_argument("run_student_da: priority profile does not fit roster");

    Assignment out;
    out.student_to_program.assign(n_students, Assignment::kUnassigned);
    out.assigned_rank.assign(n_students, 0);
    out.filled.assign(programs.size(), 0);

    using HeapEntry = std::pair<Key, std::int32_t>;  // worst held on top
    std::vector<std::priority_queue<HeapEntry>> held(programs.size());
    std::vector<std::int32_t> ptr(n_students, 0);

    std::queue<std::int32_t> free;
    for (int s = 0; s < n_students; ++s) free.push(s);

    while (!free.empty()) {
        std::int32_t s = free.front();
        free.pop();
        for (;;) {
            const auto& prefs = roster.students[s].prefs;
            if (ptr[s] >= static_cast<int>(prefs.size())) break;  // exhausted: unassigned
            const std::int32_t p = prefs[ptr[s]];
            const Key key{roster.students[s].priority_class[ptr[s]], prio.lottery[s]};
            if (out.filled[p] < programs.programs[p].capacity) {
                held[p].emplace(key, s);
                ++out.filled[p];
                break;
            }
            const auto worst = held[p].top();
            if (key < worst.first) {
                held[p].pop();
                held[p].emplace(key, s);
                s = worst.second;
                ++ptr[s];  // the bumped student moves past this program
                continue;
            }
            ++ptr[s];
        }
    }

    for (std::size_t p = 0; p < held.size(); ++p)
        while (!held[p].empty()) {
            const auto [key, s] = held[p].top();
            held[p].pop();
            out.student_to_program[s] = static_cast<std::int32_t>(p);
            out.assigned_rank[s] = ptr[s] + 1;
        }
    return out;
}

Roster perturb_population(const Roster& roster, int delta, std::uint64_t seed) {
    if (delta == 0) return roster;
    Rng rng = make_rng(seed);
    Roster out;
    if (delta < 0) {
        const int remove = -delta;
        if (remove > roster.size())
            throw std::invalid_argument("perturb_population: cannot remove " +
                                        std::to_string(remove) + " of " +
                                        std::to_string(roster.size()) + " students");
        std::vector<std::int32_t> idx(roster.size());
        std::iota(idx.begin(), idx.end(), 0);
        for (int s = 0; s < remove; ++s) {
            const int q = s + uniform_index(rng, roster.size() - s);
            std::swap(idx[s], idx[q]);
        }
        std::vector<std::uint8_t> removed(roster.size(), 0);
        for (int s = 0; s < remove; ++s) removed[idx[s]] = 1;
        for (int s = 0; s < roster.size(); ++s)
            if (!removed[s]) out.students.push_back(roster.students[s]);
    } else {
        out = roster;
        for (int c = 0; c < delta; ++c) {
            const int src = uniform_index(rng, roster.size());
            Student copy = roster.students[src];  // same list and classes, fresh identity
            copy.id += "#dup" + std::to_string(c);
            out.students.push_back(std::move(copy));
        }
    }
    return out;
}

Roster randomize_preferences(const Roster& roster, int num_programs, std::uint64_t seed) {
    std::vector<double> weight(num_programs, 0.0);
    std::int64_t total = 0;
    for (const auto& s : roster.students)
        for (const auto p : s.prefs) {
            ++weight[p];
            ++total;
        }
    if (total == 0)
        throw std::invalid_argument("randomize_preferences: roster has no applications");
    std::vector<std::int32_t> positive;
    for (int p = 0; p < num_programs; ++p)
        if (weight[p] > 0) positive.push_back(p);

    Rng rng = make_rng(seed);
    Roster out;
    out.students.reserve(roster.students.size());
    std::vector<std::pair<double, std::int32_t>> keys;
    for (const auto& s : roster.students) {
        const int len = static_cast<int>(s.prefs.size());
        if (len > static_cast<int>(positive.size()))
            throw std::invalid_argument("randomize_preferences: student '" + s.id + "' lists " +
                                        std::to_string(len) + " programs but only " +
                                        std::to_string(positive.size()) +
                                        " programs have applicants");
        // Weighted sampling without replacement (fixed weights): order the
        // programs by u^(1/w) descending and take the first len.
        keys.clear();
        for (const auto p : positive)
            keys.emplace_back(std::pow(uniform01(rng), 1.0 / weight[p]), p);
        std::partial_sort(keys.begin(), keys.begin() + len, keys.end(),
                          [](const auto& a, const auto& b) { return a.first > b.first; });
        Student ns;
        ns.id = s.id;
        for (int q = 0; q < len; ++q) ns.prefs.push_back(keys[q].second);
        ns.priority_class.assign(len, 0);
        out.students.push_back(std::move(ns));
    }
    return out;
}

AssignmentSummary summarize_assignment(const Assignment& assignment, const Roster& roster,
                                       const std::vector<int>& ks) {
    if (ks.empty()) throw std::invalid_argument("summarize_assignment: ks must be non-empty");
    AssignmentSummary out;
    const int n = roster.size();
    for (const auto k : ks) {
        int within = 0;
        for (int s = 0; s < n; ++s)
            if (assignment.assigned_rank[s] >= 1 && assignment.assigned_rank[s] <= k) ++within;
        out.top_k.emplace_back(k, n > 0 ? static_cast<double>(within) / n : 0.0);
    }
    int unassigned = 0;
    for (int s = 0; s < n; ++s) unassigned += (assignment.student_to_program[s] == Assignment::kUnassigned);
    out.unassigned = n > 0 ? static_cast<double>(unassigned) / n : 0.0;
    return out;
}

std::optional<std::pair<int, int>> find_blocking_pair(const Roster& roster,
                                                      const Programs& programs,
                                                      const PriorityProfile& prio,
                                                      const Assignment& assignment) {
    // Worst held key per program.
    std::vector<Key> worst(programs.size(), Key{-1, -1});
    for (int s = 0; s < roster.size(); ++s) {
        const auto p = assignment.student_to_program[s];
        if (p == Assignment::kUnassigned) continue;
        const Key key{class_at(roster.students[s], p), prio.lottery[s]};
        if (key > worst[p]) worst[p] = key;
    }
    for (int s = 0; s < roster.size(); ++s) {
        const auto& st = roster.students[s];
        const int stop = assignment.student_to_program[s] == Assignment::kUnassigned
                             ? static_cast<int>(st.prefs.size())
                             : assignment.assigned_rank[s] - 1;
        for (int q = 0; q < stop; ++q) {
            const auto p = st.prefs[q];
            if (assignment.filled[p] < programs.programs[p].capacity) return std::make_pair(s, p);
            const Key key{st.priority_class[q], prio.lottery[s]};
            if (key < worst[p]) return std::make_pair(s, p);
        }
    }
    return std::nullopt;
}

}  // namespace mm::school
