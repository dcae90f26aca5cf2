/*@ requires size >= 1; */
int SearchZero(int data[], int size) {
  int i = 0;
  int res;
  while (i < size) {
    if (data[i] != 0) break;
    i++;
  }
  if (i == size) res = 0; else res = 1;
  return res;
}
