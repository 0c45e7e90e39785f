void exit(int status);

int main() {
  int x;

  if(x==10)
    exit(1);

  assert(x!=10);
}
