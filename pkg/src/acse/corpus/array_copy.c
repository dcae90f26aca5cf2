/*@ requires n >= 0 && \valid(dst + (0 .. n-1)) && \valid_read(src + (0 .. n-1)); */
void array_copy(int dst[], int src[], int n) {
  int i = 0;
  while (i < n) {
    dst[i] = src[i];
    i = i + 1;
  }
}
