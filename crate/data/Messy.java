import java.util.*;

public class Messy {
    public static List<Integer> p(List<Integer> l, int t, boolean f) {
        List<Integer> r = new ArrayList<>();
        for (int i = 0; i < l.size(); i++) {
            int x = l.get(i);
            if (f) {
                if (x > t) { if (x % 2 == 0) { r.add(x * 2); } else { r.add(x * 3); } }
            } else {
                if (x <= t) { if (x % 2 == 0) { r.add(x / 2); } else { r.add(x + 1); } }
            }
        }
        int s = 0;
        for (int j = 0; j < r.size(); j++) { s = s + r.get(j); }
        if (s > 100) { System.out.println("big " + s); } else { System.out.println("small " + s); }
        return r;
    }
}
