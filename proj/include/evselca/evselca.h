#ifndef EVSELCA_H
#define EVSELCA_H

/* C interface to the EVSELCA solver toolkit. All structured payloads cross
 * the boundary as JSON text; the library never touches the filesystem.
 *
 * Every function returning int yields a status code. Output strings are
 * heap-allocated and must be released with evselca_string_free; on any
 * non-OK status the error out-parameter (when non-NULL) receives a message.
 * Status EVSELCA_INFEASIBLE still populates the result payload so callers
 * can inspect diagnostics.
 */

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define EVSELCA_API __declspec(dllexport)
#else
#define EVSELCA_API __attribute__((visibility("default")))
#endif

enum evselca_status {
    EVSELCA_OK = 0,
    EVSELCA_INFEASIBLE = 1,
    EVSELCA_INVALID_INPUT = 2,
    EVSELCA_LIMIT_EXCEEDED = 3,
    EVSELCA_INTERNAL_ERROR = 4
};

typedef struct evselca_instance evselca_instance;

EVSELCA_API const char* evselca_version(void);
EVSELCA_API const char* evselca_status_name(int status);
EVSELCA_API void evselca_string_free(char* text);

/* Instance lifecycle. Parse validates structure only; evselca_instance_validate
 * runs the semantic checks and reports violations as a JSON array. */
EVSELCA_API int evselca_instance_parse(const char* json_text, evselca_instance** out,
                                       char** error);
EVSELCA_API int evselca_instance_generate(const char* gen_spec_json, evselca_instance** out,
                                          char** error);
EVSELCA_API int evselca_instance_to_json(const evselca_instance* inst, char** out_json,
                                         char** error);
EVSELCA_API int evselca_instance_validate(const evselca_instance* inst, char** violations_json,
                                          char** error);
EVSELCA_API int evselca_instance_hash(const evselca_instance* inst, char** out_hash,
                                      char** error);
EVSELCA_API void evselca_instance_free(evselca_instance* inst);

/* Route clustering under the intra-cluster battery cap (fraction of capacity).
 * Returns the clusters document: cuts, members, recharge geometry summary. */
EVSELCA_API int evselca_cluster(const evselca_instance* inst, double intra_cap_frac,
                                char** out_json, char** error);

/* Evaluates a recharge plan against a charger deployment. Output bundles the
 * schedule, cost breakdown, per-step occupancy, and defect list; pass a
 * non-zero explain flag to include the eligibility sets. */
EVSELCA_API int evselca_evaluate(const evselca_instance* inst, double intra_cap_frac,
                                 const char* plan_json, const char* deployment_json, int explain,
                                 char** out_json, char** error);

/* Optimization. method is "ga", "exact", or "hybrid"; config_json holds
 * optional "ga" and "exact" objects. Returns EVSELCA_INFEASIBLE with the
 * best-attempt payload when no feasible plan exists. */
EVSELCA_API int evselca_solve(const evselca_instance* inst, double intra_cap_frac,
                              const char* method, const char* config_json, char** out_json,
                              char** error);

/* Emits the cluster-level MILP in CPLEX LP format. */
EVSELCA_API int evselca_export_milp(const evselca_instance* inst, double intra_cap_frac,
                                    char** out_lp, char** error);

/* Reconstructs a schedule from externally solved LP variable values and
 * re-checks feasibility plus the reported objective. */
EVSELCA_API int evselca_replay(const evselca_instance* inst, double intra_cap_frac,
                               const char* solution_json, char** out_json, char** error);

/* Runs a parameter sweep from a sweep spec document. out_json carries the
 * structured outcome, out_csv the flat results table. */
EVSELCA_API int evselca_sweep(const char* sweep_spec_json, char** out_json, char** out_csv,
                              char** error);

#ifdef __cplusplus
}
#endif

#endif
