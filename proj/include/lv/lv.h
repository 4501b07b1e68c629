#ifndef LV_H
#define LV_H

#include <stddef.h>
#include <stdint.h>

#include "lv/lv_export.h"

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lv_status {
  LV_OK = 0,
  LV_ERR_INVALID_ARGUMENT = 1,
  LV_ERR_NOT_FOUND = 2,
  LV_ERR_TYPE_MISMATCH = 3,
  LV_ERR_OUT_OF_RANGE = 4,
  LV_ERR_PARSE = 5,
  LV_ERR_IO = 6,
  LV_ERR_STATE = 7,
  LV_ERR_INTERNAL = 99
} lv_status;

typedef struct lv_session lv_session;
typedef struct lv_table lv_table;

LV_API const char* lv_version(void);
LV_API const char* lv_status_name(lv_status status);

/* Message of the last failed call on this thread; "" after a success. */
LV_API const char* lv_last_error(void);

/* Every char* handed out by the library is released with this. */
LV_API void lv_string_free(char* text);

/* Sessions ------------------------------------------------------------- */

LV_API lv_status lv_session_open(const char* config_path, lv_session** out);
/* base_dir resolves relative csv paths; may be NULL for the working directory. */
LV_API lv_status lv_session_open_json(const char* config_json, const char* base_dir, lv_session** out);
LV_API void lv_session_close(lv_session* session);

LV_API const char* lv_session_id(const lv_session* session);
/* LV_ERR_NOT_FOUND when the config declares no port. */
LV_API lv_status lv_session_port(const lv_session* session, int* port);

/* Initial scene_full messages, newline-delimited. */
LV_API lv_status lv_session_connect(lv_session* session, char** replies);

/* Handles one protocol message. Protocol-level problems (bad fields, unknown
   plots, stale seq) are reported as "error" replies with LV_OK; replies are
   newline-delimited JSON. */
LV_API lv_status lv_session_handle(lv_session* session, const char* message, char** replies);

/* Handles a queue of messages after merging superseded pointer moves. */
LV_API lv_status lv_session_handle_batch(lv_session* session, const char* const* messages, size_t count,
                                         char** replies);

/* Headless runs ----------------------------------------------------------- */

LV_API lv_status lv_replay(const char* config_path, const char* script_path, int include_scenes,
                           char** report_json);
LV_API lv_status lv_bench(uint64_t points, uint64_t steps, uint64_t seed, char** result_json);

/* Tables ---------------------------------------------------------------- */

LV_API lv_status lv_table_load_csv(const char* path, lv_table** out);
LV_API lv_status lv_table_parse_csv(const char* text, lv_table** out);
LV_API size_t lv_table_nrow(const lv_table* table);
LV_API size_t lv_table_ncol(const lv_table* table);
/* Borrowed pointer, valid until lv_table_free. */
LV_API lv_status lv_table_column_name(const lv_table* table, size_t index, const char** name);
/* "numeric" or "categorical". */
LV_API lv_status lv_table_column_kind(const lv_table* table, size_t index, const char** kind);
LV_API lv_status lv_table_to_csv(const lv_table* table, char** csv);
LV_API void lv_table_free(lv_table* table);

#ifdef __cplusplus
}
#endif

#endif
