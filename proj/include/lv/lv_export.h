#ifndef LV_EXPORT_H
#define LV_EXPORT_H

#if defined _WIN32 || defined __CYGWIN__
#  ifdef LV_BUILDING_LIBRARY
#    define LV_API __declspec(dllexport)
#  else
#    define LV_API __declspec(dllimport)
#  endif
#elif defined(__GNUC__) && __GNUC__ >= 4
#  define LV_API __attribute__((visibility("default")))
#else
#  define LV_API
#endif

#endif
