// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#ifndef SGKIT_H
#define SGKIT_H

/* C interface to the sgkit library: experiment configuration, the runner
 * commands and a few numeric helpers. Every function that can fail returns
 * an sgkit_status; the message of the most recent failure on the calling
 * thread is available from sgkit_last_error(). */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(SGKIT_BUILDING_LIBRARY)
#    define SGKIT_API __declspec(dllexport)
#  else
#    define SGKIT_API __declspec(dllimport)
#  endif
#else
#  define SGKIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status values double as process exit codes for the command-line tool. */
typedef enum sgkit_status {
    SGKIT_OK = 0,
    SGKIT_ERR_USAGE = 1,      /* bad arguments, shapes or call order */
    SGKIT_ERR_CONFIG = 2,     /* malformed configuration or input file */
    SGKIT_ERR_INFEASIBLE = 3, /* no admissible initialization */
    SGKIT_ERR_NUMERIC = 4,    /* divergence or failed integration */
    SGKIT_ERR_IO = 5,
    SGKIT_ERR_INTERNAL = 6
} sgkit_status;

typedef struct sgkit_experiment sgkit_experiment;

/* Receives report text from the runner commands. */
typedef void (*sgkit_sink)(void* user, const char* data, size_t len);

SGKIT_API const char* sgkit_version(void);

/* Message of the last failure on this thread, "" if none. The pointer is
 * valid until the next failing call on the same thread. */
SGKIT_API const char* sgkit_last_error(void);

SGKIT_API const char* sgkit_status_name(sgkit_status status);

/* A configuration with every key at its default. */
SGKIT_API sgkit_status sgkit_experiment_new(sgkit_experiment** out);
SGKIT_API sgkit_status sgkit_experiment_load(const char* path, sgkit_experiment** out);
SGKIT_API sgkit_status sgkit_experiment_parse(const char* text, sgkit_experiment** out);
SGKIT_API void sgkit_experiment_free(sgkit_experiment* exp);

SGKIT_API sgkit_status sgkit_experiment_set(sgkit_experiment* exp,
                                            const char* key,
                                            const char* value);

/* Text getters copy at most cap bytes including the terminator into buf
 * and store the full length (without terminator) in *needed when it is
 * not NULL. buf may be NULL when cap is 0. */
SGKIT_API sgkit_status sgkit_experiment_get(const sgkit_experiment* exp,
                                            const char* key,
                                            char* buf,
                                            size_t cap,
                                            size_t* needed);
SGKIT_API sgkit_status sgkit_experiment_echo(const sgkit_experiment* exp,
                                             char* buf,
                                             size_t cap,
                                             size_t* needed);
SGKIT_API sgkit_status sgkit_experiment_validate(const sgkit_experiment* exp);

/* Runs one of "init-solve", "train", "sweep", "probe", "encode". Report
 * text goes to sink (may be NULL); files go to the configured output
 * directory. threads caps parallel sweep cells, 0 meaning one per core.
 * init-solve returns SGKIT_ERR_INFEASIBLE when a layer has no admissible
 * initialization, after writing its report. */
SGKIT_API sgkit_status sgkit_run(const sgkit_experiment* exp,
                                 const char* command,
                                 size_t threads,
                                 sgkit_sink sink,
                                 void* user);

/* gamma * f(sharpness * v) for a named surrogate shape. */
SGKIT_API sgkit_status sgkit_surrogate(const char* shape,
                                       double gamma,
                                       double sharpness,
                                       double q,
                                       double v,
                                       double* out);

/* Latency code of an intensity; *fired is 0 when no spike is emitted. */
SGKIT_API sgkit_status sgkit_latency(double x,
                                     double theta,
                                     double tau,
                                     double* time,
                                     int* fired);

#ifdef __cplusplus
}
#endif

#endif
