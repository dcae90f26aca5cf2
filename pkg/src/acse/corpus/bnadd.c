/*@ requires n >= 0;
    requires \valid(rr + (0 .. n-1)) && \valid_read(ap + (0 .. n-1)) && \valid_read(bp + (0 .. n-1)); */
void BnADD(int rr[], int ap[], int bp[], int n) {
  int i = 0;
  while (i + 4 <= n) {
    rr[i] = ap[i] + bp[i];
    rr[i + 1] = ap[i + 1] + bp[i + 1];
    rr[i + 2] = ap[i + 2] + bp[i + 2];
    rr[i + 3] = ap[i + 3] + bp[i + 3];
    i = i + 4;
  }
  while (i < n) {
    rr[i] = ap[i] + bp[i];
    i++;
  }
}
