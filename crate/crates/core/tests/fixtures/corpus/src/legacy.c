#include <openssl/des.h>

/* Legacy card readers still speak 3DES. */
