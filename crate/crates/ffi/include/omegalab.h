/* C ABI for the omegalab orbit-schedule library.
 *
 * Conventions:
 *   - Fallible functions return int32_t status codes; 0 means success.
 *   - Out-parameters are written only on success.
 *   - Strings returned through out-parameters must be released with
 *     omegalab_string_free; handles with their matching _free function.
 *   - omegalab_last_error() describes the most recent failure on the
 *     calling thread; the pointer is owned by the library.
 */

#ifndef OMEGALAB_H
#define OMEGALAB_H

#include <stdint.h>
#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define OMEGALAB_OK 0
#define OMEGALAB_ERR_NULL_ARGUMENT (-1)
#define OMEGALAB_ERR_INVALID_UTF8 (-2)
#define OMEGALAB_ERR_BAD_INPUT (-3)
#define OMEGALAB_ERR_UNSUPPORTED (-4)
#define OMEGALAB_ERR_SYNDETIC_CENTER (-5)
#define OMEGALAB_ERR_CERTIFICATE (-6)
#define OMEGALAB_ERR_BUFFER_TOO_SMALL (-7)
#define OMEGALAB_ERR_PANIC (-8)

/* Opaque handles. */
typedef struct OmegalabSchedule OmegalabSchedule;
typedef struct OmegalabCertificate OmegalabCertificate;

/* Static version string; do not free. */
const char *omegalab_version(void);

/* Message of the most recent error on this thread; do not free. */
const char *omegalab_last_error(void);

/* Frees a string returned through an out-parameter. */
void omegalab_string_free(char *ptr);

/* Builds a schedule realizing the given case label ("1".."6", optionally
 * primed like "3'") together with its certificate. `nonrecurrent` nonzero
 * selects the nonrecurrent witness mode; zero selects the recurrent
 * nontransitive mode (unprimed labels only). `ambient` is the alphabet
 * size (>= 3). */
int32_t omegalab_realize_case(const char *label,
                              int32_t nonrecurrent,
                              uint32_t ambient,
                              uint64_t seed,
                              OmegalabSchedule **out_schedule,
                              OmegalabCertificate **out_certificate);

/* JSON bridging; documents carry {"format":1,...}. */
int32_t omegalab_schedule_from_json(const char *json, OmegalabSchedule **out);
int32_t omegalab_schedule_to_json(const OmegalabSchedule *handle, char **out_json);
int32_t omegalab_certificate_from_json(const char *json, OmegalabCertificate **out);
int32_t omegalab_certificate_to_json(const OmegalabCertificate *handle, char **out_json);

/* Materializes the first `len` symbols (one id per byte) into `buf`,
 * which must hold at least `len` bytes. */
int32_t omegalab_schedule_prefix(const OmegalabSchedule *handle,
                                 size_t len,
                                 uint8_t *buf);

/* Classifies the schedule into its twelve-case label; writes the
 * NUL-terminated label into `buf` (`buf_len` >= 4 recommended). Fails with
 * OMEGALAB_ERR_SYNDETIC_CENTER for almost periodic orbits. */
int32_t omegalab_classify(const OmegalabSchedule *handle,
                          char *buf,
                          size_t buf_len);

/* Re-validates a certificate against a schedule. */
int32_t omegalab_verify(const OmegalabSchedule *schedule,
                        const OmegalabCertificate *certificate);

void omegalab_schedule_free(OmegalabSchedule *handle);
void omegalab_certificate_free(OmegalabCertificate *handle);

#ifdef __cplusplus
}
#endif

#endif /* OMEGALAB_H */
