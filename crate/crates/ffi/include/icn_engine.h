#ifndef ICN_ENGINE_H
#define ICN_ENGINE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported call.
 */
typedef enum IcnStatus {
  ICN_STATUS_OK = 0,
  ICN_STATUS_NULL_ARGUMENT = 1,
  ICN_STATUS_INVALID_UTF8 = 2,
  ICN_STATUS_INPUT = 3,
  ICN_STATUS_CONFIG = 4,
  ICN_STATUS_CONFLICT = 5,
  ICN_STATUS_INVARIANT = 6,
  ICN_STATUS_IO = 7,
  ICN_STATUS_PANIC = 8,
} IcnStatus;

/**
 * Parsed lexicon; share it between sessions.
 */
typedef struct IcnLexicon IcnLexicon;

/**
 * One analysis session.
 */
typedef struct IcnSession IcnSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse lexicon text. On success `*out` owns a handle for `icn_lexicon_free`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum IcnStatus icn_lexicon_load(const char *text, struct IcnLexicon **out);

/**
 * # Safety
 * `lex` must come from `icn_lexicon_load` and not be used afterwards.
 */
void icn_lexicon_free(struct IcnLexicon *lex);

/**
 * Open a session. `config_toml` may be null for defaults.
 *
 * # Safety
 * Pointers must be valid; `problem` and `config_toml` NUL-terminated.
 */
enum IcnStatus icn_session_open(const struct IcnLexicon *lex,
                                const char *problem,
                                const char *config_toml,
                                struct IcnSession **out);

/**
 * Process one utterance given as JSON (`id`, `speaker`, `t_ms`, `text`, optional `triples`).
 * On success `*events_out`, if not null, receives the batch as JSON.
 *
 * # Safety
 * Pointers must be valid; `utterance_json` NUL-terminated.
 */
enum IcnStatus icn_session_process_json(struct IcnSession *session,
                                        const char *utterance_json,
                                        char **events_out);

/**
 * Canonical snapshot JSON.
 *
 * # Safety
 * `session` must be a live handle and `out` a valid pointer.
 */
enum IcnStatus icn_session_snapshot_json(const struct IcnSession *session, char **out);

/**
 * Canonical metrics report JSON.
 *
 * # Safety
 * `session` must be a live handle and `out` a valid pointer.
 */
enum IcnStatus icn_session_metrics_json(const struct IcnSession *session, char **out);

/**
 * # Safety
 * `session` must come from `icn_session_open` and not be used afterwards.
 */
void icn_session_free(struct IcnSession *session);

/**
 * # Safety
 * `s` must be a string returned by this library, or null.
 */
void icn_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread; do not free.
 */
const char *icn_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ICN_ENGINE_H */
