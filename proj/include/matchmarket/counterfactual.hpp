// School-choice counterfactuals on external preference-list data:
// many-to-one student-proposing deferred acceptance with capacities and a
// single lottery shared by all programs, population perturbation, and
// popularity-weighted preference randomization.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "matchmarket/rng.hpp"

namespace mm::school {

struct Student {
    std::string id;
    std::vector<std::int32_t> prefs;           // program indices, best first
    std::vector<std::int32_t> priority_class;  // aligned with prefs; lower = higher priority
};

struct Roster {
    std::vector<Student> students;
    int size() const { return static_cast<int>(students.size()); }
};

struct Program {
    std::string id;
    int capacity = 0;
};

struct Programs {
    std::vector<Program> programs;
    int size() const { return static_cast<int>(programs.size()); }
    std::optional<int> index_of(const std::string& id) const;
};

struct Assignment {
    static constexpr std::int32_t kUnassigned = -1;
    std::vector<std::int32_t> student_to_program;
    std::vector<std::int32_t> assigned_rank;  // 1-based rank on the student's list, 0 if unassigned
    std::vector<std::int32_t> filled;         // seats taken per program
};

// One lottery draw per student, shared by every program; programs order
// applicants by (priority_class, lottery), both ascending.
struct PriorityProfile {
    std::vector<std::int64_t> lottery;  // by student index; lower = earlier
};

// --- file I/O -------------------------------------------------------------
// Programs CSV:  program_id,capacity
// Roster CSV:    student_id,rank,program_id[,priority_class], rank from 1.
// Parse errors carry the line number; referential errors list the offenders.

Programs load_programs(const std::string& path);
Roster load_roster(const std::string& path, const Programs& programs);
void save_programs(const Programs& programs, const std::string& path);
void save_roster(const Roster& roster, const Programs& programs, const std::string& path);

// --- operations ------------------------------------------------------------

PriorityProfile apply_single_tiebreak(const Roster& roster, const Programs& programs,
                                      std::uint64_t seed);

// Ordering a program would use over a set of students (ties broken by the
// shared lottery); exposed for tests and inspection.
std::vector<int> program_order(const Roster& roster, const PriorityProfile& prio,
                               int program, const std::vector<int>& applicants);

Assignment run_student_da(const Roster& roster, const Programs& programs,
                          const PriorityProfile& prio);

// delta < 0 removes |delta| students uniformly without replacement; delta > 0
// appends delta uniform-with-replacement copies under fresh ids (lottery
// numbers are drawn later, at tie-break time). Throws on over-removal.
Roster perturb_population(const Roster& roster, int delta, std::uint64_t seed);

// Redraws every student's list at its original length, entries sampled
// without replacement with probability proportional to the program's
// application count in the input roster (weights are not updated during
// sampling). Priority classes reset to 0 on the redrawn lists.
Roster randomize_preferences(const Roster& roster, int num_programs, std::uint64_t seed);

struct AssignmentSummary {
    std::vector<std::pair<int, double>> top_k;  // (k, fraction assigned within top k)
    double unassigned = 0.0;
};

AssignmentSummary summarize_assignment(const Assignment& assignment, const Roster& roster,
                                       const std::vector<int>& ks);

// Blocking pair for the stability property suite: a student who prefers a
// program that has a free seat or holds someone it ranks below the student.
std::optional<std::pair<int, int>> find_blocking_pair(const Roster& roster,
                                                      const Programs& programs,
                                                      const PriorityProfile& prio,
                                                      const Assignment& assignment);

}  // namespace mm::school
